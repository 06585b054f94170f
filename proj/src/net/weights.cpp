#include "vstab/net/weights.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

#include "vstab/core/rng.hpp"

namespace vstab::net {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'V', 'S', 'T', 'W'};

static_assert(std::endian::native == std::endian::little,
              "weight files assume a little-endian host");

}  // namespace

void WeightStore::add(const std::string& name, Tensor t) {
    if (name.empty()) throw InvalidInputError("WeightStore::add: empty name");
    auto [it, inserted] = tensors_.emplace(name, std::move(t));
    if (!inserted) throw InvalidInputError("WeightStore::add: duplicate parameter " + name);
    order_.push_back(name);
}

bool WeightStore::contains(const std::string& name) const { return tensors_.count(name) > 0; }

const Tensor& WeightStore::get(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw FormatError("WeightStore: missing parameter " + name);
    return it->second;
}

Tensor& WeightStore::get_mutable(const std::string& name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw FormatError("WeightStore: missing parameter " + name);
    return it->second;
}

Eigen::Index WeightStore::parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& [name, t] : tensors_) n += t.size();
    return n;
}

void WeightStore::save(const std::string& path) const {
    json header;
    header["format"] = "vstab-weights";
    header["version"] = kVersion;
    header["seed"] = seed_;
    json tensors = json::array();
    for (const auto& name : order_) {
        const Tensor& t = tensors_.at(name);
        json entry;
        entry["name"] = name;
        entry["shape"] = t.shape();
        tensors.push_back(std::move(entry));
    }
    header["tensors"] = std::move(tensors);
    const std::string head = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("WeightStore::save: cannot open " + path);
    out.write(kMagic, 4);
    const auto len = static_cast<std::uint32_t>(head.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const auto& name : order_) {
        const Tensor& t = tensors_.at(name);
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.size() * sizeof(float)));
    }
    if (!out) throw IoError("WeightStore::save: write failed for " + path);
}

WeightStore WeightStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("WeightStore::load: cannot open " + path);

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("WeightStore::load: " + path + " is not a weight file (bad magic)");
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 4);
    if (!in) throw FormatError("WeightStore::load: truncated header length");
    std::string head(len, '\0');
    in.read(head.data(), static_cast<std::streamsize>(len));
    if (!in) throw FormatError("WeightStore::load: truncated header");

    json header;
    try {
        header = json::parse(head);
    } catch (const json::exception& e) {
        throw FormatError(std::string("WeightStore::load: malformed JSON header: ") + e.what());
    }
    if (header.value("format", "") != "vstab-weights")
        throw FormatError("WeightStore::load: unknown format tag");
    if (header.value("version", 0u) != kVersion)
        throw FormatError("WeightStore::load: unsupported version " +
                          std::to_string(header.value("version", 0u)));

    WeightStore store;
    store.seed_ = header.value("seed", 0ull);
    for (const auto& entry : header.at("tensors")) {
        const std::string name = entry.at("name").get<std::string>();
        const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
        Tensor t(shape);
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(float)));
        if (!in) throw FormatError("WeightStore::load: truncated data for parameter " + name);
        t.validate_finite(name.c_str());
        store.add(name, std::move(t));
    }
    // Trailing bytes indicate a corrupt or mismatched file.
    in.peek();
    if (!in.eof()) throw FormatError("WeightStore::load: trailing bytes after tensor data");
    return store;
}

void WeightStore::expect(
    const std::vector<std::pair<std::string, std::vector<Eigen::Index>>>& spec) const {
    auto shape_str = [](const std::vector<Eigen::Index>& s) {
        std::string r = "(";
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) r += ", ";
            r += std::to_string(s[i]);
        }
        return r + ")";
    };
    for (const auto& [name, shape] : spec) {
        auto it = tensors_.find(name);
        if (it == tensors_.end())
            throw FormatError("WeightStore: missing parameter " + name);
        if (it->second.shape() != shape)
            throw FormatError("WeightStore: parameter " + name + " has shape " +
                              it->second.shape_string() + ", expected " + shape_str(shape));
    }
}

WeightStore init_weights_from_spec(const std::vector<WeightInit>& spec, std::uint64_t seed) {
    WeightStore store;
    store.set_seed(seed);
    Rng rng(seed);
    for (const auto& item : spec) {
        Tensor t(item.shape);
        switch (item.kind) {
            case WeightInit::Kind::Uniform:
                for (Eigen::Index i = 0; i < t.size(); ++i)
                    t.data()[i] = static_cast<float>(rng.uniform(-item.bound, item.bound));
                break;
            case WeightInit::Kind::Zero:
                break;
            case WeightInit::Kind::One:
                t.storage().setOnes();
                break;
        }
        store.add(item.name, std::move(t));
    }
    return store;
}

}  // namespace vstab::net

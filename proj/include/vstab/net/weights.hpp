#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vstab/core/tensor.hpp"

namespace vstab::net {

/// How one named parameter is filled by seeded initialization.
struct WeightInit {
    std::string name;
    std::vector<Eigen::Index> shape;
    enum class Kind { Uniform, Zero, One } kind = Kind::Uniform;
    double bound = 0.0;  // Uniform: sampled in [-bound, +bound]
};

/// Named parameter tensors with insertion-ordered serialization.
///
/// File format: the magic "VSTW", a little-endian uint32 header length, a
/// JSON header ({"format", "version", "seed", "tensors": [{name, shape}]}),
/// then the raw little-endian IEEE-754 float32 data of every tensor in
/// header order. Save/load round-trips bit-exactly.
class WeightStore {
public:
    static constexpr std::uint32_t kVersion = 1;

    WeightStore() = default;

    void add(const std::string& name, Tensor t);
    bool contains(const std::string& name) const;
    const Tensor& get(const std::string& name) const;  // throws FormatError if absent
    Tensor& get_mutable(const std::string& name);

    const std::vector<std::string>& names() const { return order_; }
    std::size_t size() const { return order_.size(); }
    std::uint64_t seed() const { return seed_; }
    void set_seed(std::uint64_t s) { seed_ = s; }

    /// Total parameter count across all tensors.
    Eigen::Index parameter_count() const;

    void save(const std::string& path) const;
    static WeightStore load(const std::string& path);

    /// Validates that every expected (name, shape) pair exists and matches;
    /// throws FormatError naming the first offending parameter.
    void expect(const std::vector<std::pair<std::string, std::vector<Eigen::Index>>>& spec) const;

private:
    std::map<std::string, Tensor> tensors_;
    std::vector<std::string> order_;
    std::uint64_t seed_ = 0;
};

/// Fills a parameter list deterministically from one seeded stream.
WeightStore init_weights_from_spec(const std::vector<WeightInit>& spec, std::uint64_t seed);

}  // namespace vstab::net

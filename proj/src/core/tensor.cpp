#include "vstab/core/tensor.hpp"

#include <sstream>

namespace vstab {

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << ", ";
        os << shape_[i];
    }
    os << ")";
    return os.str();
}

void Tensor::validate_finite(const char* label) const {
    if (!data_.allFinite())
        throw InvalidInputError(std::string("Tensor: non-finite values in ") + label);
}

}  // namespace vstab

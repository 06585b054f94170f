#pragma once

#include <Eigen/Core>

#include <numeric>
#include <string>
#include <vector>

#include "vstab/core/error.hpp"

namespace vstab {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrixXf>;
using ConstMatrixMap = Eigen::Map<const RowMatrixXf>;

/// Dense row-major float tensor. Network activations use (C, H, W) layout;
/// token matrices are rank-2 (tokens, dim).
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<Eigen::Index> shape)
        : shape_(std::move(shape)), data_(Eigen::VectorXf::Zero(count(shape_))) {}

    Tensor(std::vector<Eigen::Index> shape, Eigen::VectorXf data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (count(shape_) != data_.size())
            throw ShapeMismatchError("Tensor: shape product != data length");
    }

    static Tensor zeros(std::vector<Eigen::Index> shape) { return Tensor(std::move(shape)); }

    const std::vector<Eigen::Index>& shape() const { return shape_; }
    Eigen::Index rank() const { return static_cast<Eigen::Index>(shape_.size()); }
    Eigen::Index dim(std::size_t i) const { return shape_[i]; }
    Eigen::Index size() const { return data_.size(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    Eigen::VectorXf& storage() { return data_; }
    const Eigen::VectorXf& storage() const { return data_; }

    /// View of the whole storage as a rows x cols row-major matrix.
    MatrixMap matrix(Eigen::Index rows, Eigen::Index cols) {
        if (rows * cols != size()) throw ShapeMismatchError("Tensor::matrix: bad view size");
        return MatrixMap(data_.data(), rows, cols);
    }
    ConstMatrixMap matrix(Eigen::Index rows, Eigen::Index cols) const {
        if (rows * cols != size()) throw ShapeMismatchError("Tensor::matrix: bad view size");
        return ConstMatrixMap(data_.data(), rows, cols);
    }

    /// Channel plane view of a (C, H, W) tensor.
    MatrixMap plane(Eigen::Index c) {
        check_chw();
        return MatrixMap(data_.data() + c * shape_[1] * shape_[2], shape_[1], shape_[2]);
    }
    ConstMatrixMap plane(Eigen::Index c) const {
        check_chw();
        return ConstMatrixMap(data_.data() + c * shape_[1] * shape_[2], shape_[1], shape_[2]);
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    std::string shape_string() const;

    /// Throws InvalidInputError if any value is NaN or infinite.
    void validate_finite(const char* label) const;

private:
    static Eigen::Index count(const std::vector<Eigen::Index>& s) {
        Eigen::Index n = 1;
        for (auto d : s) {
            if (d <= 0) throw ShapeMismatchError("Tensor: nonpositive dimension");
            n *= d;
        }
        return n;
    }
    void check_chw() const {
        if (shape_.size() != 3) throw ShapeMismatchError("Tensor::plane: tensor is not rank 3");
    }

    std::vector<Eigen::Index> shape_;
    Eigen::VectorXf data_;
};

}  // namespace vstab

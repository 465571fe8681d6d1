#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "uvtex/errors.hpp"

namespace uvtex {

// Dense row-major tensor. Rank up to 4 in practice.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;
    explicit TensorT(std::vector<int> s) : shape(std::move(s)), data(count(shape), T(0)) {}

    static TensorT zeros(std::vector<int> s) { return TensorT(std::move(s)); }

    static TensorT full(std::vector<int> s, T v) {
        TensorT t(std::move(s));
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    static int64_t count(const std::vector<int>& s) {
        int64_t n = 1;
        for (int d : s) n *= d;
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    int rank() const { return static_cast<int>(shape.size()); }

    T& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
    const T& operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

    // 2-d / 3-d / 4-d indexing (unchecked).
    T& at(int i, int j) { return data[static_cast<size_t>(i) * shape[1] + j]; }
    const T& at(int i, int j) const { return data[static_cast<size_t>(i) * shape[1] + j]; }
    T& at(int i, int j, int k) {
        return data[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    const T& at(int i, int j, int k) const {
        return data[(static_cast<size_t>(i) * shape[1] + j) * shape[2] + k];
    }
    T& at(int i, int j, int k, int l) {
        return data[((static_cast<size_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
    }
    const T& at(int i, int j, int k, int l) const {
        return data[((static_cast<size_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
    }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

using Tensor = TensorT<float>;
using TensorD = TensorT<double>;

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    check(a.shape == b.shape, Err::ShapeMismatch, what);
}

} // namespace uvtex

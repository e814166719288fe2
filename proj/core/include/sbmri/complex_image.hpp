#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "sbmri/errors.hpp"

namespace sbmri {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

// 2D complex-valued image, row-major. H and W must be powers of two.
class ComplexImage {
public:
    ComplexImage() = default;
    ComplexImage(std::size_t h, std::size_t w, cplx fill = {})
        : h_(h), w_(w), data_(h * w, fill) {
        if (!is_pow2(h) || !is_pow2(w))
            throw UsageError("ComplexImage: dimensions must be powers of two");
    }

    std::size_t height() const { return h_; }
    std::size_t width() const { return w_; }
    std::size_t size() const { return data_.size(); }

    cplx& operator()(std::size_t y, std::size_t x) { return data_[y * w_ + x]; }
    const cplx& operator()(std::size_t y, std::size_t x) const { return data_[y * w_ + x]; }
    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }

    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }

    bool same_shape(const ComplexImage& o) const { return h_ == o.h_ && w_ == o.w_; }

    bool all_finite() const {
        for (const cplx& v : data_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    double norm() const {
        double s = 0;
        for (const cplx& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    ComplexImage& operator+=(const ComplexImage& o) {
        require_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    ComplexImage& operator-=(const ComplexImage& o) {
        require_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    ComplexImage& operator*=(double s) {
        for (cplx& v : data_) v *= s;
        return *this;
    }

    // this += a * o
    void axpy(double a, const ComplexImage& o) {
        require_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * o.data_[i];
    }

    void require_shape(const ComplexImage& o) const {
        if (!same_shape(o)) throw UsageError("ComplexImage: shape mismatch");
    }

private:
    std::size_t h_ = 0, w_ = 0;
    std::vector<cplx> data_;
};

inline ComplexImage operator+(ComplexImage a, const ComplexImage& b) { a += b; return a; }
inline ComplexImage operator-(ComplexImage a, const ComplexImage& b) { a -= b; return a; }
inline ComplexImage operator*(double s, ComplexImage a) { a *= s; return a; }

// <a, b> = sum conj(a_i) b_i
inline cplx dot(const ComplexImage& a, const ComplexImage& b) {
    a.require_shape(b);
    cplx s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

} // namespace sbmri

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace cfsim {

using Complex = std::complex<double>;

/// Tolerance below which an amplitude coefficient counts as zero.
/// Matches the dark-port calibration threshold.
inline constexpr double kAmpTol = 1e-12;

/// Truncated polynomial in the coupling strength eps, with complex
/// coefficients stored sparsely by degree. All arithmetic closes under
/// truncation at max_order; degrees above it are discarded.
class EpsPoly {
  public:
    EpsPoly() : max_order_(2) {}
    explicit EpsPoly(int max_order) : max_order_(max_order) {
        if (max_order < 0) throw std::invalid_argument("max_order must be >= 0");
    }

    static EpsPoly zero(int max_order) { return EpsPoly(max_order); }

    static EpsPoly constant(Complex c, int max_order) {
        EpsPoly p(max_order);
        p.set(0, c);
        return p;
    }

    /// The monomial c * eps^degree (vanishes if degree > max_order).
    static EpsPoly monomial(int degree, Complex c, int max_order) {
        EpsPoly p(max_order);
        p.set(degree, c);
        return p;
    }

    /// eta = sqrt(1 - eps^2) expanded to max_order. Even degrees only:
    /// 1 - eps^2/2 - eps^4/8 - eps^6/16 - 5 eps^8/128 - ...
    /// Coefficient recurrence for sqrt(1-x): a_0 = 1, a_k = a_{k-1} (k - 3/2) / k.
    static EpsPoly eta(int max_order) {
        EpsPoly p(max_order);
        double a = 1.0;
        p.set(0, Complex(1.0, 0.0));
        for (int k = 1; 2 * k <= max_order; ++k) {
            a *= (static_cast<double>(k) - 1.5) / static_cast<double>(k);
            p.set(2 * k, Complex(a, 0.0));
        }
        return p;
    }

    int max_order() const { return max_order_; }
    bool empty() const { return coeffs_.empty(); }

    Complex coeff(int degree) const {
        auto it = coeffs_.find(degree);
        return it == coeffs_.end() ? Complex(0, 0) : it->second;
    }

    void set(int degree, Complex c) {
        if (degree < 0) throw std::invalid_argument("negative degree");
        if (degree > max_order_) return;
        if (std::abs(c) == 0.0) {
            coeffs_.erase(degree);
        } else {
            coeffs_[degree] = c;
        }
    }

    void add_term(int degree, Complex c) {
        if (degree > max_order_ || degree < 0) return;
        auto it = coeffs_.find(degree);
        if (it == coeffs_.end()) {
            if (std::abs(c) != 0.0) coeffs_[degree] = c;
        } else {
            it->second += c;
            if (std::abs(it->second) == 0.0) coeffs_.erase(it);
        }
    }

    EpsPoly& operator+=(const EpsPoly& o) {
        for (const auto& [d, c] : o.coeffs_) add_term(d, c);
        return *this;
    }

    EpsPoly& operator-=(const EpsPoly& o) {
        for (const auto& [d, c] : o.coeffs_) add_term(d, -c);
        return *this;
    }

    friend EpsPoly operator+(EpsPoly a, const EpsPoly& b) { return a += b; }
    friend EpsPoly operator-(EpsPoly a, const EpsPoly& b) { return a -= b; }

    EpsPoly operator*(const EpsPoly& o) const {
        EpsPoly r(max_order_);
        for (const auto& [da, ca] : coeffs_) {
            for (const auto& [db, cb] : o.coeffs_) {
                if (da + db > max_order_) break;  // o.coeffs_ ordered by degree
                r.add_term(da + db, ca * cb);
            }
        }
        return r;
    }

    EpsPoly& operator*=(const EpsPoly& o) { return *this = *this * o; }

    EpsPoly scaled(Complex c) const {
        EpsPoly r(max_order_);
        if (std::abs(c) == 0.0) return r;
        for (const auto& [d, a] : coeffs_) r.coeffs_[d] = a * c;
        return r;
    }

    /// Multiply by eps^k (degree shift; terms pushed past max_order vanish).
    /// Returns true if any nonzero coefficient was truncated away.
    bool shift_degree(int k) {
        std::map<int, Complex> shifted;
        bool overflow = false;
        for (const auto& [d, c] : coeffs_) {
            if (d + k > max_order_) {
                if (std::abs(c) > kAmpTol) overflow = true;
                continue;
            }
            shifted[d + k] = c;
        }
        coeffs_ = std::move(shifted);
        return overflow;
    }

    /// Complex conjugate of every coefficient.
    EpsPoly conj() const {
        EpsPoly r(max_order_);
        for (const auto& [d, c] : coeffs_) r.coeffs_[d] = std::conj(c);
        return r;
    }

    Complex eval(double eps) const {
        Complex acc(0, 0);
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            // Horner over the sparse gaps.
            acc += it->second * std::pow(eps, it->first);
        }
        return acc;
    }

    /// Smallest degree with |coeff| > tol, or -1 when none.
    int leading_degree(double tol = kAmpTol) const {
        for (const auto& [d, c] : coeffs_) {
            if (std::abs(c) > tol) return d;
        }
        return -1;
    }

    Complex leading_coeff(double tol = kAmpTol) const {
        int d = leading_degree(tol);
        return d < 0 ? Complex(0, 0) : coeff(d);
    }

    bool is_zero(double tol = kAmpTol) const { return leading_degree(tol) < 0; }

    double max_abs_coeff() const {
        double m = 0;
        for (const auto& [d, c] : coeffs_) m = std::max(m, std::abs(c));
        return m;
    }

    const std::map<int, Complex>& coeffs() const { return coeffs_; }

    std::string str() const {
        if (coeffs_.empty()) return "0";
        std::string s;
        for (const auto& [d, c] : coeffs_) {
            if (!s.empty()) s += " + ";
            s += "(" + std::to_string(c.real()) + (c.imag() >= 0 ? "+" : "") +
                 std::to_string(c.imag()) + "i)";
            if (d > 0) s += "*eps^" + std::to_string(d);
        }
        return s;
    }

  private:
    int max_order_;
    std::map<int, Complex> coeffs_;
};

}  // namespace cfsim

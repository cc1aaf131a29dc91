#ifndef RSHEDGE_NUMBERS_HPP
#define RSHEDGE_NUMBERS_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rshedge {

/// Exact rational scalar used throughout the library.
using Rat = mpq_class;

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses "p/q", "-3/7", "12", "0.25", "-1.5" into an exact rational.
Rat rat_from_string(const std::string& s);

/// Canonical form: integers print without denominator, otherwise "p/q" in
/// lowest terms with positive denominator.
std::string rat_to_string(const Rat& r);

double rat_to_double(const Rat& r);

/// Extended real: a rational or one of the two infinities. Payoffs use
/// -inf for infeasible plans; +inf only appears in price reports.
class XR {
  public:
    XR() : kind_(Kind::Finite), v_(0) {}
    XR(Rat v) : kind_(Kind::Finite), v_(std::move(v)) {}
    XR(long v) : kind_(Kind::Finite), v_(v) {}
    XR(int v) : kind_(Kind::Finite), v_(v) {}

    static XR neg_inf() { return XR(Kind::NegInf); }
    static XR pos_inf() { return XR(Kind::PosInf); }

    bool finite() const { return kind_ == Kind::Finite; }
    bool is_neg_inf() const { return kind_ == Kind::NegInf; }
    bool is_pos_inf() const { return kind_ == Kind::PosInf; }

    const Rat& val() const {
        if (!finite()) throw std::logic_error("XR: value of infinite");
        return v_;
    }

    friend bool operator==(const XR& a, const XR& b) {
        if (a.kind_ != b.kind_) return false;
        return a.kind_ != Kind::Finite || a.v_ == b.v_;
    }
    friend bool operator!=(const XR& a, const XR& b) { return !(a == b); }
    friend bool operator<(const XR& a, const XR& b) {
        if (a.kind_ == Kind::NegInf) return b.kind_ != Kind::NegInf;
        if (a.kind_ == Kind::PosInf) return false;
        if (b.kind_ == Kind::PosInf) return true;
        if (b.kind_ == Kind::NegInf) return false;
        return a.v_ < b.v_;
    }
    friend bool operator<=(const XR& a, const XR& b) { return a < b || a == b; }
    friend bool operator>(const XR& a, const XR& b) { return b < a; }
    friend bool operator>=(const XR& a, const XR& b) { return b <= a; }

    /// Shift by a finite rational; infinities absorb.
    XR operator+(const Rat& m) const {
        return finite() ? XR(v_ + m) : *this;
    }
    /// Scale by a positive rational; infinities absorb.
    XR scaled(const Rat& a) const {
        if (sgn(a) <= 0) throw std::logic_error("XR: nonpositive scale");
        return finite() ? XR(v_ * a) : *this;
    }
    /// min(x, n) for finite n.
    XR truncated(const Rat& n) const {
        if (is_pos_inf()) return XR(n);
        if (!finite()) return *this;
        return v_ < n ? *this : XR(n);
    }

    static XR max(const XR& a, const XR& b) { return a < b ? b : a; }

    std::string str() const;  // "p/q" | "-inf" | "+inf"
    double to_double() const;

  private:
    enum class Kind : std::uint8_t { NegInf, Finite, PosInf };
    explicit XR(Kind k) : kind_(k), v_(0) {}
    Kind kind_;
    Rat v_;
};

}  // namespace rshedge

#endif

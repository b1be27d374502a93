#ifndef KNASTER_RATIONAL_HPP
#define KNASTER_RATIONAL_HPP

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace knaster {

/// Exact rational scalar backed by GMP. Always held in lowest terms with a
/// positive denominator.
class Rational {
public:
    Rational() = default;
    Rational(long n) : q_(n) {}  // NOLINT(google-explicit-constructor)
    Rational(int n) : q_(n) {}   // NOLINT(google-explicit-constructor)
    Rational(long n, long d) {
        if (d == 0) throw std::domain_error("Rational: zero denominator");
        q_ = mpq_class(n, d);
        q_.canonicalize();
    }
    explicit Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

    /// Parses "p/q" or "p". Rejects zero denominators and stray characters.
    static Rational parse(std::string_view text) {
        std::string s(text);
        if (s.empty()) throw std::invalid_argument("Rational: empty string");
        auto valid_int = [](std::string_view t) {
            if (t.empty()) return false;
            std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
            if (i == t.size()) return false;
            for (; i < t.size(); ++i)
                if (t[i] < '0' || t[i] > '9') return false;
            return true;
        };
        auto slash = s.find('/');
        std::string num = s.substr(0, slash);
        std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
        if (!valid_int(num) || !valid_int(den) || den[0] == '-' || den[0] == '+')
            throw std::invalid_argument("Rational: malformed '" + s + "'");
        if (num[0] == '+') num.erase(0, 1);
        mpz_class n(num, 10), d(den, 10);
        if (d == 0) throw std::invalid_argument("Rational: zero denominator in '" + s + "'");
        mpq_class q(n, d);
        q.canonicalize();
        return Rational(std::move(q));
    }

    /// Lowest-terms "p/q"; integers print without the "/1".
    std::string str() const {
        if (q_.get_den() == 1) return q_.get_num().get_str();
        return q_.get_num().get_str() + "/" + q_.get_den().get_str();
    }

    double to_double() const { return q_.get_d(); }
    const mpq_class& raw() const { return q_; }
    mpz_class num() const { return q_.get_num(); }
    mpz_class den() const { return q_.get_den(); }
    int sign() const { return sgn(q_); }
    bool is_zero() const { return sgn(q_) == 0; }

    Rational operator-() const { return Rational(mpq_class(-q_)); }
    Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
    Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
    Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.is_zero()) throw std::domain_error("Rational: division by zero");
        q_ /= o.q_;
        return *this;
    }
    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        int c = cmp(a.q_, b.q_);
        return c < 0 ? std::strong_ordering::less
             : c > 0 ? std::strong_ordering::greater
                     : std::strong_ordering::equal;
    }
    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    mpq_class q_{0};
};

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }
inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

/// Floor of a rational as an arbitrary-precision integer.
inline mpz_class floor(const Rational& r) {
    mpz_class out;
    mpz_fdiv_q(out.get_mpz_t(), r.raw().get_num_mpz_t(), r.raw().get_den_mpz_t());
    return out;
}

inline Rational from_mpz(const mpz_class& z) { return Rational(mpq_class(z)); }

/// lcm of two positive integers.
inline mpz_class lcm(const mpz_class& a, const mpz_class& b) {
    mpz_class out;
    mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return out;
}

}  // namespace knaster

template <>
struct std::hash<knaster::Rational> {
    std::size_t operator()(const knaster::Rational& r) const {
        return std::hash<std::string>{}(r.str());
    }
};

#endif  // KNASTER_RATIONAL_HPP

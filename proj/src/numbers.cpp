#include "rshedge/numbers.hpp"

#include <cctype>
#include <limits>

namespace rshedge {

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace

Rat rat_from_string(const std::string& raw) {
    std::string s;
    s.reserve(raw.size());
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw parse_error("empty rational literal");

    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        neg = (s[0] == '-');
        i = 1;
    }
    std::string body = s.substr(i);
    if (body.empty()) throw parse_error("bad rational literal '" + raw + "'");

    Rat out;
    auto slash = body.find('/');
    if (slash != std::string::npos) {
        std::string p = body.substr(0, slash);
        std::string q = body.substr(slash + 1);
        if (!all_digits(p) || !all_digits(q))
            throw parse_error("bad rational literal '" + raw + "'");
        mpz_class num(p, 10), den(q, 10);
        if (den == 0) throw parse_error("zero denominator in '" + raw + "'");
        out = Rat(num, den);
        out.canonicalize();
    } else {
        auto dot = body.find('.');
        if (dot != std::string::npos) {
            std::string ip = body.substr(0, dot);
            std::string fp = body.substr(dot + 1);
            if (ip.empty()) ip = "0";
            if (fp.empty()) fp = "0";
            if (!all_digits(ip) || !all_digits(fp))
                throw parse_error("bad rational literal '" + raw + "'");
            mpz_class num(ip + fp, 10);
            mpz_class den;
            mpz_ui_pow_ui(den.get_mpz_t(), 10, fp.size());
            out = Rat(num, den);
            out.canonicalize();
        } else {
            if (!all_digits(body))
                throw parse_error("bad rational literal '" + raw + "'");
            out = Rat(mpz_class(body, 10));
        }
    }
    if (neg) out = -out;
    return out;
}

std::string rat_to_string(const Rat& r) {
    Rat c(r);
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

double rat_to_double(const Rat& r) { return r.get_d(); }

std::string XR::str() const {
    if (is_neg_inf()) return "-inf";
    if (is_pos_inf()) return "+inf";
    return rat_to_string(v_);
}

double XR::to_double() const {
    if (is_neg_inf()) return -std::numeric_limits<double>::infinity();
    if (is_pos_inf()) return std::numeric_limits<double>::infinity();
    return v_.get_d();
}

}  // namespace rshedge

#pragma once

#include <cctype>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "slocc/kronecker.hpp"
#include "slocc/state_tensor.hpp"

namespace slocc {

class size_zero_error : public parse_error {
public:
    explicit size_zero_error(std::size_t offset) : parse_error(offset, "positive block size") {}
};

struct pencil_parse_result {
    kronecker_structure structure;
    std::vector<std::string> notices;
};

namespace dsl_detail {

struct cursor {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool done() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    bool accept(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c, const char* what) {
        if (!accept(c)) throw parse_error(pos, what);
    }

    int parse_nat() {
        skip_ws();
        const std::size_t start = pos;
        long v = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            v = v * 10 + (text[pos] - '0');
            if (v > 1000000) throw parse_error(start, "smaller number");
            ++pos;
        }
        if (pos == start) throw parse_error(pos, "number");
        return static_cast<int>(v);
    }

    std::string parse_decimal(bool allow_sign) {
        skip_ws();
        const std::size_t start = pos;
        std::string out;
        if (allow_sign && pos < text.size() && (text[pos] == '+' || text[pos] == '-'))
            out.push_back(text[pos++]);
        bool digits = false, point = false;
        while (pos < text.size()) {
            const char c = text[pos];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                digits = true;
                out.push_back(c);
                ++pos;
            } else if (c == '.' && !point) {
                point = true;
                out.push_back(c);
                ++pos;
            } else {
                break;
            }
        }
        if (!digits) throw parse_error(start, "decimal literal");
        return out;
    }
};

// eig := "inf" | signed_decimal [("+"|"-") decimal "i"]
inline eigenvalue_locus parse_eig(cursor& cur) {
    cur.skip_ws();
    if (cur.text.compare(cur.pos, 3, "inf") == 0) {
        cur.pos += 3;
        return eigenvalue_locus::infinity();
    }
    const bigrat re = decimal_to_rational(cur.parse_decimal(true));
    cur.skip_ws();
    if (cur.pos < cur.text.size() && (cur.text[cur.pos] == '+' || cur.text[cur.pos] == '-')) {
        const bool neg = cur.text[cur.pos] == '-';
        ++cur.pos;
        const bigrat mag = decimal_to_rational(cur.parse_decimal(false));
        cur.skip_ws();
        if (cur.pos >= cur.text.size() || cur.text[cur.pos] != 'i')
            throw parse_error(cur.pos, "'i' after imaginary part");
        ++cur.pos;
        return eigenvalue_locus::finite_exact({re, neg ? -mag : mag});
    }
    return eigenvalue_locus::finite_exact({re, bigrat(0)});
}

inline std::string describe_locus(const eigenvalue_locus& x);

}  // namespace dsl_detail

// Grammar: spec := term ("+" term)* ; term := "L" nat | "Lt" nat
//        | "M" nat "(" eig ")" | "N" nat ; whitespace insignificant.
// "N k" normalizes to "M k(inf)"; repeated identical eigenvalues merge into
// one locus with a combined signature (reported as a notice).
inline pencil_parse_result parse_pencil_spec(const std::string& text) {
    using namespace dsl_detail;
    cursor cur{text};
    std::vector<int> cols, rows;
    struct locus_acc {
        eigenvalue_locus locus;
        std::vector<int> signature;
    };
    std::vector<locus_acc> loci;
    std::vector<std::string> notices;

    auto add_locus = [&](const eigenvalue_locus& x, int size, std::size_t offset) {
        if (size == 0) throw size_zero_error(offset);
        for (auto& acc : loci) {
            const bool same =
                (acc.locus.is_infinite() && x.is_infinite()) ||
                (!acc.locus.is_infinite() && !x.is_infinite() && acc.locus.exact() && x.exact() &&
                 *acc.locus.exact() == *x.exact());
            if (same) {
                acc.signature.push_back(size);
                notices.push_back("merged duplicate eigenvalue " + describe_locus(x));
                return;
            }
        }
        loci.push_back({x, {size}});
    };

    bool first = true;
    while (true) {
        if (!first && !cur.accept('+')) break;
        first = false;
        cur.skip_ws();
        const std::size_t term_at = cur.pos;
        if (cur.text.compare(cur.pos, 2, "Lt") == 0) {
            cur.pos += 2;
            const int nu = cur.parse_nat();
            if (nu == 0) throw size_zero_error(term_at);
            rows.push_back(nu);
        } else if (cur.peek() == 'L') {
            ++cur.pos;
            const int eps = cur.parse_nat();
            if (eps == 0) throw size_zero_error(term_at);
            cols.push_back(eps);
        } else if (cur.peek() == 'M') {
            ++cur.pos;
            const int size = cur.parse_nat();
            cur.expect('(', "'('");
            const eigenvalue_locus x = parse_eig(cur);
            cur.expect(')', "')'");
            add_locus(x, size, term_at);
        } else if (cur.peek() == 'N') {
            ++cur.pos;
            const int size = cur.parse_nat();
            add_locus(eigenvalue_locus::infinity(), size, term_at);
        } else {
            throw parse_error(cur.pos, "block term (L, Lt, M, or N)");
        }
        if (cur.done()) break;
    }
    if (!cur.done()) throw parse_error(cur.pos, "'+' or end of input");
    if (cols.empty() && rows.empty() && loci.empty()) throw parse_error(0, "at least one term");

    std::vector<eigenvalue_block> eigs;
    eigs.reserve(loci.size());
    for (auto& acc : loci) eigs.push_back({acc.locus, std::move(acc.signature)});
    return {kronecker_structure(std::move(cols), std::move(rows), std::move(eigs)),
            std::move(notices)};
}

namespace dsl_detail {

// Plain decimal (no exponent) that parses back to the same value.
inline std::string format_decimal(double x) {
    if (x == static_cast<long long>(x) && std::abs(x) < 1e15)
        return std::to_string(static_cast<long long>(x));
    for (int prec = 1; prec <= 17; ++prec) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.*f", prec, x);
        if (std::strtod(buf, nullptr) == x) {
            std::string s(buf);
            while (s.size() > 1 && s.back() == '0') s.pop_back();
            if (!s.empty() && s.back() == '.') s.pop_back();
            return s;
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17f", x);
    return buf;
}

inline std::string format_rational(const bigrat& q) {
    using boost::multiprecision::cpp_int;
    cpp_int num = boost::multiprecision::numerator(q);
    cpp_int den = boost::multiprecision::denominator(q);
    // exact decimal exists iff den = 2^a 5^b
    cpp_int d = den;
    int twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    if (d == 1) {
        const int digits = std::max(twos, fives);
        cpp_int scaled = num;
        for (int i = 0; i < digits; ++i) scaled *= 10;
        scaled /= den;
        std::string s = scaled.str();
        const bool neg = !s.empty() && s[0] == '-';
        if (neg) s.erase(s.begin());
        while (static_cast<int>(s.size()) <= digits) s.insert(s.begin(), '0');
        if (digits > 0) {
            s.insert(s.size() - digits, ".");
            while (s.back() == '0') s.pop_back();
            if (s.back() == '.') s.pop_back();
        }
        return (neg ? "-" : "") + s;
    }
    return format_decimal(static_cast<double>(q));  // lossy for odd denominators
}

inline std::string describe_locus(const eigenvalue_locus& x) {
    if (x.is_infinite()) return "inf";
    std::string re, im;
    bool im_neg = false;
    if (x.exact()) {
        re = format_rational(x.exact()->re);
        im_neg = x.exact()->im < 0;
        im = x.exact()->im == 0 ? "" : format_rational(boost::multiprecision::abs(x.exact()->im));
    } else {
        const cd v = x.value();
        re = format_decimal(v.real());
        im_neg = v.imag() < 0;
        im = v.imag() == 0.0 ? "" : format_decimal(std::abs(v.imag()));
    }
    if (im.empty()) return re;
    return re + (im_neg ? "-" : "+") + im + "i";
}

}  // namespace dsl_detail

// Canonical pretty-printer, inverse to parse_pencil_spec on its image.
inline std::string render_pencil_spec(const kronecker_structure& ks) {
    std::string out;
    auto append = [&](const std::string& term) {
        if (!out.empty()) out += "+";
        out += term;
    };
    for (int eps : ks.col_indices()) append("L" + std::to_string(eps));
    for (int nu : ks.row_indices()) append("Lt" + std::to_string(nu));
    for (const auto& e : ks.eigs()) {
        const std::string value = dsl_detail::describe_locus(e.locus);
        for (int size : e.signature) append("M" + std::to_string(size) + "(" + value + ")");
    }
    return out;
}

// State JSON format: {"dims":[2,m,n],"amps":[{"idx":[i,j,k],"re":r,"im":s},...]};
// omitted entries are zero, duplicate indices are rejected.
inline state_tensor parse_state_json(const std::string& bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(static_cast<std::size_t>(e.byte), "well-formed JSON");
    }
    if (!doc.is_object() || !doc.contains("dims") || !doc["dims"].is_array() ||
        doc["dims"].size() != 3)
        throw precondition_violated("state JSON: expected \"dims\": [2, m, n]");
    const int d0 = doc["dims"][0].get<int>();
    const int m = doc["dims"][1].get<int>();
    const int n = doc["dims"][2].get<int>();
    if (d0 != 2) throw precondition_violated("state JSON: first dimension must be 2");
    if (m < 1 || n < 1) throw precondition_violated("state JSON: dimensions must be positive");

    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(2 * m * n);
    std::vector<bool> seen(static_cast<std::size_t>(2 * m * n), false);
    if (doc.contains("amps")) {
        if (!doc["amps"].is_array()) throw precondition_violated("state JSON: \"amps\" must be an array");
        for (const auto& entry : doc["amps"]) {
            if (!entry.contains("idx") || !entry["idx"].is_array() || entry["idx"].size() != 3)
                throw precondition_violated("state JSON: amplitude needs \"idx\": [i,j,k]");
            const int i = entry["idx"][0].get<int>();
            const int j = entry["idx"][1].get<int>();
            const int k = entry["idx"][2].get<int>();
            if (i < 0 || i >= 2 || j < 0 || j >= m || k < 0 || k >= n)
                throw precondition_violated("state JSON: index out of range");
            const std::size_t flat = static_cast<std::size_t>((i * m + j) * n + k);
            if (seen[flat]) throw precondition_violated("state JSON: duplicate index");
            seen[flat] = true;
            const double re = entry.value("re", 0.0);
            const double im = entry.value("im", 0.0);
            amps(static_cast<Eigen::Index>(flat)) = cd{re, im};
        }
    }
    return state_tensor(m, n, std::move(amps));  // rejects the zero vector
}

inline std::string state_to_json(const state_tensor& s) {
    nlohmann::json doc;
    doc["dims"] = {2, s.m(), s.n()};
    doc["amps"] = nlohmann::json::array();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < s.m(); ++j)
            for (int k = 0; k < s.n(); ++k) {
                const cd v = s.amp(i, j, k);
                if (v == cd{0.0, 0.0}) continue;
                doc["amps"].push_back(
                    {{"idx", {i, j, k}}, {"re", v.real()}, {"im", v.imag()}});
            }
    return doc.dump();
}

}  // namespace slocc

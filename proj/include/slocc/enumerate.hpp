#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "slocc/classify.hpp"
#include "slocc/dsl.hpp"
#include "slocc/pencil.hpp"

namespace slocc {

// One table row: a family of SLOCC classes sharing a Kronecker shape, with
// the first three distinct loci anchored to 0, 1, infinity and any further
// loci left as named free parameters with distinctness constraints.
class class_family {
public:
    struct family_locus {
        std::vector<int> signature;
        int param_index = -1;          // >= 0 for free parameters
        eigenvalue_locus anchor;       // meaningful when param_index < 0
    };

    class_family(std::vector<int> cols, std::vector<int> rows, std::vector<family_locus> loci,
                 orbit_type type)
        : cols_(std::move(cols)), rows_(std::move(rows)), loci_(std::move(loci)), type_(type) {
        for (const auto& l : loci_) num_params_ = std::max(num_params_, l.param_index + 1);
    }

    const std::vector<int>& col_indices() const { return cols_; }
    const std::vector<int>& row_indices() const { return rows_; }
    const std::vector<family_locus>& loci() const { return loci_; }
    orbit_type type() const { return type_; }
    int num_params() const { return num_params_; }

    // Parameter values must avoid 0, 1, infinity and each other.
    kronecker_structure instantiate(const std::vector<cd>& params) const {
        if (static_cast<int>(params.size()) != num_params_)
            throw precondition_violated("class_family: wrong number of parameters");
        std::vector<eigenvalue_locus> fixed = {eigenvalue_locus::finite_exact(gauss_rat(0)),
                                               eigenvalue_locus::finite_exact(gauss_rat(1)),
                                               eigenvalue_locus::infinity()};
        std::vector<eigenvalue_locus> values;
        for (const cd& p : params) values.push_back(eigenvalue_locus::finite(p));
        for (std::size_t i = 0; i < values.size(); ++i) {
            for (const auto& f : fixed)
                if (chordal_distance(values[i], f) <= 1e-9)
                    throw precondition_violated("class_family: parameter collides with an anchor");
            for (std::size_t j = i + 1; j < values.size(); ++j)
                if (chordal_distance(values[i], values[j]) <= 1e-9)
                    throw precondition_violated("class_family: parameters must be distinct");
        }
        std::vector<eigenvalue_block> eigs;
        for (const auto& l : loci_)
            eigs.push_back({l.param_index >= 0 ? values[l.param_index] : l.anchor, l.signature});
        return kronecker_structure(cols_, rows_, std::move(eigs));
    }

    // Generic admissible parameter assignment for spot checks.
    std::vector<cd> default_params() const {
        std::vector<cd> out;
        for (int i = 0; i < num_params_; ++i) out.push_back(cd{2.0 + i, 1.0 + 0.5 * i});
        return out;
    }

    state_tensor representative(const std::vector<cd>& params) const {
        return representative_state(instantiate(params));
    }

    std::string constraints() const {
        if (num_params_ == 0) return "";
        if (num_params_ == 1) return "x1 distinct from 0, 1, inf";
        std::string names;
        for (int i = 0; i < num_params_; ++i) names += ", x" + std::to_string(i + 1);
        return "set {0, 1, inf" + names + "} has cardinality " + std::to_string(3 + num_params_);
    }

    // Pencil in the block language, parameters rendered symbolically.
    std::string pencil_text() const {
        std::string out;
        auto append = [&](const std::string& t) {
            if (!out.empty()) out += "+";
            out += t;
        };
        for (int eps : cols_) append("L" + std::to_string(eps));
        for (int nu : rows_) append("Lt" + std::to_string(nu));
        for (const auto& l : loci_) {
            const std::string value = l.param_index >= 0
                                          ? "x" + std::to_string(l.param_index + 1)
                                          : dsl_detail::describe_locus(l.anchor);
            for (int size : l.signature) append("M" + std::to_string(size) + "(" + value + ")");
        }
        return out;
    }

    // Representative ket in the table style, e.g. |0>(|01>+x1|33>) + |1>(|00>).
    std::string representative_text() const {
        const kronecker_structure ks = instantiate_with_markers();
        const matrix_pencil p = kcf_to_pencil(ks);
        auto side_text = [&](const cmat& slice) {
            std::string acc;
            for (int j = 0; j < p.rows(); ++j)
                for (int k = 0; k < p.cols(); ++k) {
                    const cd v = slice(j, k);
                    if (v == cd{0.0, 0.0}) continue;
                    std::string coeff;
                    if (v != cd{1.0, 0.0}) {
                        const int param = marker_param(v);
                        coeff = param >= 0 ? "x" + std::to_string(param + 1)
                                           : dsl_detail::describe_locus(
                                                 eigenvalue_locus::finite(v));
                        coeff += " ";
                    }
                    if (!acc.empty()) acc += "+";
                    acc += coeff + "|" + std::to_string(j) + "," + std::to_string(k) + ">";
                }
            return acc.empty() ? std::string("0") : acc;
        };
        return "|0>(" + side_text(p.R) + ") + |1>(" + side_text(p.S) + ")";
    }

    // Structural key: parameters matter only by slot, not value.
    std::string key() const {
        std::ostringstream os;
        for (int e : cols_) os << "L" << e << "+";
        for (int e : rows_) os << "T" << e << "+";
        std::vector<std::string> sigs;
        for (const auto& l : loci_) {
            std::string s = "[";
            for (int x : l.signature) s += std::to_string(x) + ",";
            s += "]";
            sigs.push_back(s);
        }
        std::sort(sigs.begin(), sigs.end());
        for (const auto& s : sigs) os << s;
        return os.str();
    }

private:
    // Instantiation with recognizable placeholder values for rendering.
    kronecker_structure instantiate_with_markers() const {
        std::vector<cd> params;
        for (int i = 0; i < num_params_; ++i) params.push_back(marker_value(i));
        return instantiate(params);
    }
    static cd marker_value(int param) { return {1e6 + param, 0.25}; }
    static int marker_param(cd v) {
        for (int i = 0; i < 16; ++i)
            if (v == marker_value(i)) return i;
        return -1;
    }

    std::vector<int> cols_, rows_;
    std::vector<family_locus> loci_;
    orbit_type type_;
    int num_params_ = 0;
};

namespace enum_detail {

inline std::vector<std::vector<int>> partitions_of(int t) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::function<void(int, int)> rec = [&](int left, int maxpart) {
        if (left == 0) {
            out.push_back(cur);
            return;
        }
        for (int p = std::min(left, maxpart); p >= 1; --p) {
            cur.push_back(p);
            rec(left - p, p);
            cur.pop_back();
        }
    };
    rec(t, t);
    return out;
}

inline void signature_multisets_rec(int left, const std::vector<std::vector<int>>& pool,
                                    std::size_t max_index, std::vector<std::vector<int>>& cur,
                                    std::vector<std::vector<std::vector<int>>>& out) {
    if (left == 0) {
        out.push_back(cur);
        return;
    }
    for (std::size_t i = 0; i <= max_index; ++i) {
        const int sum = std::accumulate(pool[i].begin(), pool[i].end(), 0);
        if (sum > left) continue;
        cur.push_back(pool[i]);
        signature_multisets_rec(left - sum, pool, i, cur, out);
        cur.pop_back();
    }
}

// All multisets of nonempty partitions summing to `total`.
inline std::vector<std::vector<std::vector<int>>> all_signature_multisets(int total) {
    std::vector<std::vector<int>> pool;
    for (int t = total; t >= 1; --t)
        for (auto& p : partitions_of(t)) pool.push_back(p);
    // canonical order: larger sums first, then lexicographically larger
    std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
        const int sa = std::accumulate(a.begin(), a.end(), 0);
        const int sb = std::accumulate(b.begin(), b.end(), 0);
        if (sa != sb) return sa > sb;
        return a > b;
    });
    std::vector<std::vector<std::vector<int>>> out;
    std::vector<std::vector<int>> cur;
    if (total == 0) {
        out.push_back({});
        return out;
    }
    signature_multisets_rec(total, pool, pool.empty() ? 0 : pool.size() - 1, cur, out);
    return out;
}

// Multisets of positive integers with `parts` entries summing to <= budget,
// listed as sorted vectors.
inline void index_multisets_rec(int parts, int budget, int minval, std::vector<int>& cur,
                                std::vector<std::vector<int>>& out) {
    if (parts == 0) {
        out.push_back(cur);
        return;
    }
    for (int v = minval; v * parts <= budget; ++v) {
        cur.push_back(v);
        index_multisets_rec(parts - 1, budget - v, v, cur, out);
        cur.pop_back();
    }
}

inline std::vector<std::vector<int>> index_multisets(int parts, int budget) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    index_multisets_rec(parts, budget, 1, cur, out);
    return out;
}

}  // namespace enum_detail

// Exhaustively lists all families of fully entangled SLOCC classes of the
// 2 x m x n system, one per Kronecker shape up to Moebius equivalence.
// Classification of the generated shapes may run on a small worker pool;
// results are merged by index, so the output is identical for any thread
// count.
inline std::vector<class_family> enumerate_classes(int m, int n, int threads = 1) {
    if (m < 2 || m > n || n > 12)
        throw precondition_violated("enumerate_classes: need 2 <= m <= n <= 12");
    using namespace enum_detail;

    std::vector<class_family> out;
    std::map<std::string, bool> seen;

    const int ab_gap = n - m;  // #L blocks minus #L^T blocks
    for (int b = 0; b + ab_gap + 2 * b <= m; ++b) {
        const int a = b + ab_gap;
        for (const auto& eps : index_multisets(a, m)) {
            for (const auto& nus : index_multisets(b, m)) {
                int used_m = 0, used_n = 0;
                for (int e : eps) { used_m += e; used_n += e + 1; }
                for (int e : nus) { used_m += e + 1; used_n += e; }
                const int T = m - used_m;
                if (T < 0 || n - used_n != T) continue;

                for (const auto& sigs : all_signature_multisets(T)) {
                    if (eps.empty() && nus.empty()) {
                        if (sigs.empty()) continue;  // empty structure
                        // purely diagonal pencils need at least two loci to
                        // be fully entangled
                        if (sigs.size() == 1 &&
                            std::all_of(sigs[0].begin(), sigs[0].end(),
                                        [](int e) { return e == 1; }))
                            continue;
                    }

                    // canonical locus order: multiplicity desc, signature desc
                    std::vector<std::vector<int>> ordered = sigs;
                    std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
                        const int sx = std::accumulate(x.begin(), x.end(), 0);
                        const int sy = std::accumulate(y.begin(), y.end(), 0);
                        if (sx != sy) return sx > sy;
                        return x > y;
                    });
                    std::vector<class_family::family_locus> loci;
                    const std::array<eigenvalue_locus, 3> anchors = {
                        eigenvalue_locus::finite_exact(gauss_rat(0)),
                        eigenvalue_locus::finite_exact(gauss_rat(1)),
                        eigenvalue_locus::infinity()};
                    for (std::size_t i = 0; i < ordered.size(); ++i) {
                        class_family::family_locus l;
                        l.signature = ordered[i];
                        if (i < 3) {
                            l.anchor = anchors[i];
                        } else {
                            l.param_index = static_cast<int>(i) - 3;
                        }
                        loci.push_back(std::move(l));
                    }

                    class_family fam(eps, nus, std::move(loci), orbit_type::null_cone);
                    if (!seen.emplace(fam.key(), true).second) continue;  // defensive dedup
                    out.push_back(std::move(fam));
                }
            }
        }
    }

    // classification pass; shapes are independent of each other
    std::vector<orbit_type> types(out.size());
    auto classify_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            types[i] = classify(out[i].instantiate(out[i].default_params()));
    };
    if (threads <= 1 || out.size() < 8) {
        classify_range(0, out.size());
    } else {
        const int pool = std::min<int>(threads, 8);
        std::vector<std::thread> workers;
        const std::size_t chunk = (out.size() + pool - 1) / pool;
        for (int t = 0; t < pool; ++t) {
            const std::size_t lo = t * chunk;
            const std::size_t hi = std::min(out.size(), lo + chunk);
            if (lo < hi) workers.emplace_back(classify_range, lo, hi);
        }
        for (auto& w : workers) w.join();
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = class_family(out[i].col_indices(), out[i].row_indices(),
                              std::vector<class_family::family_locus>(out[i].loci()), types[i]);

    // deterministic ordering: null-cone, strictly semistable, strictly
    // polystable, stable; canonical key inside each group
    auto group = [](orbit_type t) {
        switch (t) {
            case orbit_type::null_cone: return 0;
            case orbit_type::strictly_semistable: return 1;
            case orbit_type::strictly_polystable: return 2;
            case orbit_type::stable: return 3;
        }
        return 4;
    };
    std::sort(out.begin(), out.end(), [&](const class_family& x, const class_family& y) {
        if (group(x.type()) != group(y.type())) return group(x.type()) < group(y.type());
        return x.key() < y.key();
    });
    return out;
}

// Consistency check of the existence criterion: strictly semistable families
// exist iff the polystable (diagonal) orbit dimensions are not all equal.
struct main_theorem_report {
    bool consistent = false;
    bool sss_exists = false;
    bool dims_all_equal = true;
    std::vector<int> polystable_dims;
};

inline main_theorem_report verify_main_theorem(int m, int n) {
    main_theorem_report rep;
    const auto families = enumerate_classes(m, n);
    for (const auto& fam : families) {
        if (fam.type() == orbit_type::strictly_semistable) rep.sss_exists = true;
        if (is_polystable(fam.type())) {
            const auto ks = fam.instantiate(fam.default_params());
            if (ks.is_diagonal() && ks.m() == ks.n())
                rep.polystable_dims.push_back(
                    orbit_dim_diagonal(ks.multiplicities(), ks.m(), ks.n()));
        }
    }
    for (int d : rep.polystable_dims)
        if (d != rep.polystable_dims.front()) rep.dims_all_equal = false;
    rep.consistent = rep.sss_exists == !rep.dims_all_equal;
    return rep;
}

// ---- table rendering -----------------------------------------------------------

enum class table_format { markdown, csv, json };

inline table_format table_format_from_string(const std::string& s) {
    if (s == "md" || s == "markdown") return table_format::markdown;
    if (s == "csv") return table_format::csv;
    if (s == "json") return table_format::json;
    throw precondition_violated("render_table: unknown format '" + s + "'");
}

inline std::string render_table(const std::vector<class_family>& families, table_format fmt) {
    // closure annotations for strictly semistable rows
    std::map<std::string, int> row_of_key;
    for (std::size_t i = 0; i < families.size(); ++i)
        row_of_key[families[i].key()] = static_cast<int>(i) + 1;
    auto comment_for = [&](const class_family& fam) -> std::string {
        switch (fam.type()) {
            case orbit_type::strictly_semistable: {
                const auto limit = polystable_limit(fam.instantiate(fam.default_params()));
                class_family probe(limit.col_indices(), limit.row_indices(), {}, fam.type());
                // structural key of the limit family
                std::ostringstream os;
                std::vector<std::string> sigs;
                for (const auto& e : limit.eigs()) {
                    std::string s = "[";
                    for (int x : e.signature) s += std::to_string(x) + ",";
                    s += "]";
                    sigs.push_back(s);
                }
                std::sort(sigs.begin(), sigs.end());
                for (const auto& s : sigs) os << s;
                const auto it = row_of_key.find(os.str());
                if (it != row_of_key.end())
                    return "family " + std::to_string(it->second) + " is in this class' closure";
                return "a polystable class lies in this class' closure";
            }
            case orbit_type::strictly_polystable:
                return "contains critical states";
            case orbit_type::stable: {
                const auto ks = fam.instantiate(fam.default_params());
                if (ks.m() == ks.n() && ks.is_diagonal())
                    return "maximal orbit dimension " +
                           std::to_string(orbit_dim_diagonal(ks.multiplicities(), ks.m(), ks.n()));
                return families.size() == 1 ? "only fully entangled class" : "";
            }
            case orbit_type::null_cone:
                return "";
        }
        return "";
    };

    if (fmt == table_format::json) {
        nlohmann::json doc = nlohmann::json::array();
        for (std::size_t i = 0; i < families.size(); ++i) {
            const auto& fam = families[i];
            nlohmann::json row;
            row["no"] = i + 1;
            row["pencil"] = fam.pencil_text();
            row["representative"] = fam.representative_text();
            row["type"] = to_string(fam.type());
            row["parameters"] = fam.num_params();
            row["constraints"] = fam.constraints();
            row["comment"] = comment_for(fam);
            doc.push_back(std::move(row));
        }
        return doc.dump(2) + "\n";
    }

    std::ostringstream os;
    if (fmt == table_format::markdown) {
        os << "| No. | Pencil | Representative | Type | Comments |\n";
        os << "| --- | --- | --- | --- | --- |\n";
        for (std::size_t i = 0; i < families.size(); ++i) {
            const auto& fam = families[i];
            os << "| " << (i + 1) << " | " << fam.pencil_text() << " | "
               << fam.representative_text() << " | " << to_string(fam.type()) << " | ";
            std::string comment = comment_for(fam);
            if (!fam.constraints().empty()) {
                if (!comment.empty()) comment += "; ";
                comment += fam.constraints();
            }
            os << comment << " |\n";
        }
        return os.str();
    }

    auto csv_quote = [](const std::string& s) {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += "\"\"";
            out.push_back(c);
        }
        out += "\"";
        return out;
    };
    os << "no,pencil,representative,type,comments\n";
    for (std::size_t i = 0; i < families.size(); ++i) {
        const auto& fam = families[i];
        std::string comment = comment_for(fam);
        if (!fam.constraints().empty()) {
            if (!comment.empty()) comment += "; ";
            comment += fam.constraints();
        }
        os << (i + 1) << "," << csv_quote(fam.pencil_text()) << ","
           << csv_quote(fam.representative_text()) << "," << to_string(fam.type()) << ","
           << csv_quote(comment) << "\n";
    }
    return os.str();
}

}  // namespace slocc

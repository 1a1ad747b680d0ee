#pragma once

#include <json.hpp>

#include "slocc/classify.hpp"
#include "slocc/dsl.hpp"
#include "slocc/normal_form.hpp"
#include "slocc/witness.hpp"

namespace slocc {

inline nlohmann::json complex_to_json(cd v) {
    return {{"re", v.real()}, {"im", v.imag()}};
}

inline nlohmann::json frac_to_json(const frac& f) {
    return {{"num", f.num}, {"den", f.den}};
}

inline nlohmann::json family_to_json(const operator_family& fam) {
    nlohmann::json doc;
    doc["m"] = fam.m();
    doc["n"] = fam.n();
    nlohmann::json target;
    target["kind"] = fam.target().kind == family_target_kind::zero_vector ? "ZeroVector"
                                                                          : "CriticalClass";
    if (fam.target().critical_class)
        target["critical_class"] = render_pencil_spec(*fam.target().critical_class);
    doc["target"] = std::move(target);

    doc["factors"] = nlohmann::json::array();
    for (const auto& f : fam.factors()) {
        nlohmann::json jf;
        jf["side"] = f.side == family_side::A ? "A" : (f.side == family_side::B ? "B" : "C");
        if (const auto* e = std::get_if<expdiag_factor>(&f.payload)) {
            jf["kind"] = "expdiag";
            jf["exponents"] = nlohmann::json::array();
            for (const frac& c : e->exponents) jf["exponents"].push_back(frac_to_json(c));
        } else {
            const auto& M = std::get<const_factor>(f.payload).matrix;
            jf["kind"] = "const";
            nlohmann::json rows = nlohmann::json::array();
            for (int i = 0; i < M.rows(); ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (int j = 0; j < M.cols(); ++j) row.push_back(complex_to_json(M(i, j)));
                rows.push_back(std::move(row));
            }
            jf["matrix"] = std::move(rows);
        }
        doc["factors"].push_back(std::move(jf));
    }
    return doc;
}

inline operator_family family_from_json(const nlohmann::json& doc) {
    const int m = doc.at("m").get<int>();
    const int n = doc.at("n").get<int>();
    family_target target;
    const std::string kind = doc.at("target").at("kind").get<std::string>();
    target.kind = kind == "ZeroVector" ? family_target_kind::zero_vector
                                       : family_target_kind::critical_class;
    if (doc.at("target").contains("critical_class"))
        target.critical_class =
            parse_pencil_spec(doc.at("target").at("critical_class").get<std::string>()).structure;

    std::vector<family_factor> factors;
    for (const auto& jf : doc.at("factors")) {
        family_factor f;
        const std::string side = jf.at("side").get<std::string>();
        f.side = side == "A" ? family_side::A : (side == "B" ? family_side::B : family_side::C);
        if (jf.at("kind").get<std::string>() == "expdiag") {
            expdiag_factor e;
            for (const auto& je : jf.at("exponents"))
                e.exponents.push_back(
                    frac(je.at("num").get<std::int64_t>(), je.at("den").get<std::int64_t>()));
            f.payload = std::move(e);
        } else {
            const auto& rows = jf.at("matrix");
            const int dim = static_cast<int>(rows.size());
            cmat M(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    M(i, j) = cd{rows[i][j].at("re").get<double>(),
                                 rows[i][j].at("im").get<double>()};
            f.payload = const_factor{std::move(M)};
        }
        factors.push_back(std::move(f));
    }
    return operator_family(m, n, std::move(factors), std::move(target));
}

inline nlohmann::json class_report_to_json(const class_report& rep) {
    nlohmann::json doc;
    doc["type"] = to_string(rep.type);
    doc["kcf"] = render_pencil_spec(rep.kcf);
    doc["m"] = rep.kcf.m();
    doc["n"] = rep.kcf.n();
    if (rep.stab_dim) doc["stab_dim"] = *rep.stab_dim;
    if (rep.orbit_dim) doc["orbit_dim"] = *rep.orbit_dim;
    if (rep.limit_class) doc["limit_class"] = render_pencil_spec(*rep.limit_class);
    doc["biseparable_reduct"] = rep.biseparable_reduct;
    return doc;
}

inline nlohmann::json normal_form_report_to_json(const normal_form_report& rep,
                                                 bool include_trace = true) {
    nlohmann::json doc;
    doc["verdict"] = to_string(rep.verdict);
    doc["iterations"] = rep.iterations;
    doc["norm_ratio"] = rep.norm_trace.back();
    doc["cond_numbers"] = {rep.cond_numbers[0], rep.cond_numbers[1], rep.cond_numbers[2]};
    if (include_trace) doc["norm_trace"] = rep.norm_trace;
    doc["final_state"] = nlohmann::json::parse(state_to_json(rep.final_state));
    return doc;
}

}  // namespace slocc

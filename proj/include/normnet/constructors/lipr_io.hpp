#pragma once

#include <string>

#include "../serialize.hpp"
#include "lipr.hpp"

namespace normnet {

// {"composite": {...}} with the declared certificate alongside the glue data.
inline std::string composite_to_json(const LiprComposite& c, const ArchitectureCert& cert) {
    using namespace json_out;
    std::string s = "{\"composite\":{\"d\":" + std::to_string(c.d) + ",\"n_axis\":" + std::to_string(c.n_axis) + ",\"h\":" + num(c.h) + ",\"indices\":[";
    for (std::size_t i = 0; i < c.indices.size(); ++i) {
        if (i) s += ",";
        s += array(c.indices[i].begin(), c.indices[i].end(), [](int v) { return std::to_string(v); });
    }
    s += "],\"monomials\":[";
    for (std::size_t i = 0; i < c.monomials.size(); ++i) {
        if (i) s += ",";
        s += c.monomials[i] ? network_to_json(*c.monomials[i]) : "null";
    }
    s += "],\"coeffs\":" + array(c.coeffs.begin(), c.coeffs.end(), [](double v) { return num(v); });
    s += ",\"cert\":" + cert_to_json(cert) + "}}";
    return s;
}

inline bool is_composite_json(const nlohmann::json& j) { return j.is_object() && j.contains("composite"); }

inline LiprComposite composite_from_json(const nlohmann::json& root, const Registry& reg = builtin_registry()) {
    using namespace json_in;
    const std::string path = "$.composite";
    const auto& j = field(root, "composite", "$");
    LiprComposite c;
    c.d = count(field(j, "d", path), path + ".d");
    c.n_axis = count(field(j, "n_axis", path), path + ".n_axis");
    c.h = real(field(j, "h", path), path + ".h");
    if (c.d == 0 || c.n_axis == 0 || !(c.h > 0)) throw ParseError(path + ": d, n_axis and h must be positive");
    const auto& ji = arr(field(j, "indices", path), path + ".indices");
    for (std::size_t i = 0; i < ji.size(); ++i) {
        const std::string ip = path + ".indices[" + std::to_string(i) + "]";
        const auto& row = arr(ji[i], ip);
        if (row.size() != c.d) throw ParseError(ip + ": expected " + std::to_string(c.d) + " entries");
        MultiIndex s;
        for (std::size_t a = 0; a < row.size(); ++a) s.push_back(static_cast<int>(count(row[a], ip + "[" + std::to_string(a) + "]")));
        c.indices.push_back(std::move(s));
    }
    const auto& jm = arr(field(j, "monomials", path), path + ".monomials");
    if (jm.size() != c.indices.size()) throw ParseError(path + ".monomials: length differs from indices");
    for (std::size_t i = 0; i < jm.size(); ++i) {
        if (jm[i].is_null()) {
            c.monomials.push_back(nullptr);
            continue;
        }
        auto net = network_from_json(jm[i], path + ".monomials[" + std::to_string(i) + "]", reg);
        if (net.input_dim() != c.d) throw ParseError(path + ".monomials[" + std::to_string(i) + "]: input_dim differs from d");
        c.monomials.push_back(std::make_shared<const Network>(std::move(net)));
    }
    const auto& jc = arr(field(j, "coeffs", path), path + ".coeffs");
    if (jc.size() != c.n_cubes() * c.indices.size()) throw ParseError(path + ".coeffs: expected n_cubes * indices entries");
    for (std::size_t i = 0; i < jc.size(); ++i) c.coeffs.push_back(real(jc[i], path + ".coeffs[" + std::to_string(i) + "]"));
    return c;
}

}  // namespace normnet

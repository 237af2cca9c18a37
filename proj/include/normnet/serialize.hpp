#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <string>

#include "network.hpp"

namespace normnet {

namespace json_out {

inline std::string num(double v) {
    if (!std::isfinite(v)) throw Error("serialize: non-finite value");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string str(const std::string& s) { return nlohmann::json(s).dump(); }

template <class It, class F>
std::string array(It b, It e, F&& f) {
    std::string s = "[";
    for (It it = b; it != e; ++it) {
        if (it != b) s += ",";
        s += f(*it);
    }
    return s + "]";
}

}  // namespace json_out

inline std::string cert_to_json(const ArchitectureCert& c) {
    using namespace json_out;
    std::string s = "{\"W\":" + std::to_string(c.W) + ",\"L\":" + std::to_string(c.L) + ",\"K\":" + num(c.K) + ",\"I\":";
    s += array(c.I.begin(), c.I.end(), [](std::size_t i) { return std::to_string(i); });
    return s + ",\"output_dim\":" + std::to_string(c.output_dim) + "}";
}

inline std::string network_to_json(const Network& net) {
    using namespace json_out;
    std::string s = "{\"input_dim\":" + std::to_string(net.input_dim()) + ",\"layers\":[";
    bool first = true;
    for (const auto& L : net.layers()) {
        if (!first) s += ",";
        first = false;
        s += "{\"weights\":[";
        for (Eigen::Index i = 0; i < L.weights.rows(); ++i) {
            if (i) s += ",";
            s += "[";
            for (Eigen::Index j = 0; j < L.weights.cols(); ++j) {
                if (j) s += ",";
                s += num(L.weights(i, j));
            }
            s += "]";
        }
        s += "],\"bias\":[";
        for (Eigen::Index i = 0; i < L.bias.size(); ++i) {
            if (i) s += ",";
            s += num(L.bias[i]);
        }
        s += "],\"activations\":";
        s += array(L.activations.begin(), L.activations.end(), [](const std::string& t) { return str(t); });
        s += "}";
    }
    s += "],\"cert\":" + cert_to_json(net.cert()) + "}";
    return s;
}

inline std::string serialize(const Network& net) { return network_to_json(net); }

namespace json_in {

using nlohmann::json;

inline const json& field(const json& j, const char* name, const std::string& path) {
    if (!j.is_object()) throw ParseError(path + ": expected object");
    auto it = j.find(name);
    if (it == j.end()) throw ParseError(path + ": missing field '" + name + "'");
    return *it;
}

inline double real(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path + ": expected number");
    return j.get<double>();
}

inline std::size_t count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ParseError(path + ": expected nonnegative integer");
    return j.get<std::size_t>();
}

inline const json& arr(const json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path + ": expected array");
    return j;
}

}  // namespace json_in

inline ArchitectureCert cert_from_json(const nlohmann::json& j, const std::string& path) {
    using namespace json_in;
    ArchitectureCert c;
    c.W = count(field(j, "W", path), path + ".W");
    c.L = count(field(j, "L", path), path + ".L");
    c.K = real(field(j, "K", path), path + ".K");
    const auto& I = arr(field(j, "I", path), path + ".I");
    for (std::size_t i = 0; i < I.size(); ++i) c.I.push_back(count(I[i], path + ".I[" + std::to_string(i) + "]"));
    c.output_dim = count(field(j, "output_dim", path), path + ".output_dim");
    return c;
}

inline Network network_from_json(const nlohmann::json& j, const std::string& path = "$", const Registry& reg = builtin_registry()) {
    using namespace json_in;
    const std::size_t d = count(field(j, "input_dim", path), path + ".input_dim");
    const auto& jl = arr(field(j, "layers", path), path + ".layers");
    std::vector<Layer> layers;
    for (std::size_t l = 0; l < jl.size(); ++l) {
        const std::string lp = path + ".layers[" + std::to_string(l) + "]";
        const auto& jw = arr(field(jl[l], "weights", lp), lp + ".weights");
        const auto& jb = arr(field(jl[l], "bias", lp), lp + ".bias");
        const auto& ja = arr(field(jl[l], "activations", lp), lp + ".activations");
        const auto rows = static_cast<Eigen::Index>(jw.size());
        Eigen::Index cols = -1;
        for (std::size_t i = 0; i < jw.size(); ++i) {
            const auto& row = arr(jw[i], lp + ".weights[" + std::to_string(i) + "]");
            if (cols < 0) cols = static_cast<Eigen::Index>(row.size());
            if (static_cast<Eigen::Index>(row.size()) != cols) throw ParseError(lp + ".weights: ragged rows");
        }
        if (rows == 0 || cols <= 0) throw ParseError(lp + ".weights: empty matrix");
        Matrix A(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index k = 0; k < cols; ++k)
                A(i, k) = real(jw[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)], lp + ".weights[" + std::to_string(i) + "][" + std::to_string(k) + "]");
        Vector b(static_cast<Eigen::Index>(jb.size()));
        for (std::size_t i = 0; i < jb.size(); ++i) b[static_cast<Eigen::Index>(i)] = real(jb[i], lp + ".bias[" + std::to_string(i) + "]");
        std::vector<std::string> acts;
        for (std::size_t i = 0; i < ja.size(); ++i) {
            if (!ja[i].is_string()) throw ParseError(lp + ".activations[" + std::to_string(i) + "]: expected string");
            acts.push_back(ja[i].get<std::string>());
        }
        layers.push_back(Layer{std::move(A), std::move(b), std::move(acts)});
    }
    ArchitectureCert c = cert_from_json(field(j, "cert", path), path + ".cert");
    try {
        return Network(d, std::move(layers), std::move(c), reg);
    } catch (const RegistryError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline Network deserialize(const std::string& bytes, const Registry& reg = builtin_registry()) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("$: malformed JSON: ") + e.what());
    }
    return network_from_json(j, "$", reg);
}

}  // namespace normnet

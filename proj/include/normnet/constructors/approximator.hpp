#pragma once

#include <map>
#include <memory>
#include <string>

#include "../network.hpp"

namespace normnet {

// An evaluator with a declared architecture certificate and a predicted
// sup-norm error bound on its target domain.
struct CertifiedApproximator {
    std::string target;
    std::size_t input_dim = 1;
    std::shared_ptr<const Network> network;  // null when the approximator is a composite
    ArchitectureCert cert;
    double predicted_bound = 0;
    bool declared_only = false;  // cert declared, not carried by a layered network
    ScalarFn evaluate;
    ScalarFn unclipped;  // pre-clipping map, when the construction has one
    std::shared_ptr<const Network> unclipped_network;  // layered pre-clipping network, evaluated naively
    std::map<std::string, double> info;

    double operator()(std::span<const double> x) const { return evaluate(x); }
    double operator()(double x) const {
        const double in[1] = {x};
        return evaluate(std::span<const double>(in, 1));
    }
};

inline CertifiedApproximator approximator_from_network(std::string target, Network net, double predicted) {
    CertifiedApproximator a;
    a.target = std::move(target);
    a.input_dim = net.input_dim();
    a.cert = net.cert();
    a.network = std::make_shared<const Network>(std::move(net));
    a.predicted_bound = predicted;
    auto n = a.network;
    a.evaluate = [n](std::span<const double> x) { return n->eval_scalar(x); };
    return a;
}

inline int ceil_log2(std::size_t d) {
    int D = 0;
    while ((std::size_t{1} << D) < d) ++D;
    return D;
}

inline double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    double r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(r);
}

}  // namespace normnet

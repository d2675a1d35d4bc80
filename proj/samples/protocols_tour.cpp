// Runs every setup once at equal couplings and prints the heralded yield
// and worst fidelity, then a short noisy Monte Carlo for the GHZ setup.

#include <cstdio>

#include "photonloom/photonloom.hpp"

int main() {
    using namespace photonloom;
    for (auto v : {Variant::ghz, Variant::w_direct, Variant::w_bunching, Variant::w_bunching_with_f2,
                   Variant::w_bunching_with_f1_aux}) {
        ProtocolParams p;
        p.variant = v;
        auto r = run_protocol(p);
        std::printf("%-20s heralds=%zu  total=%.6f  min_fidelity=%.6f\n", r.variant.c_str(), r.herald_count(),
                    r.total_success_probability, r.min_fidelity());
    }

    ProtocolParams p;
    NoiseParams n;
    n.p_collect = 0.8;
    n.p_detect = 0.9;
    n.dark_rate = 1e-3;
    n.seed = 1;
    auto e = estimate(p, n, 20000);
    std::printf("ghz under noise: yield=%.5f  mean_fidelity=%.6f  false_herald_rate=%.5f\n", e.yield, e.mean_fidelity,
                e.false_herald_rate);
}

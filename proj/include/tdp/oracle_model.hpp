#pragma once

#include "tdp/delay_model.hpp"
#include "tdp/sta.hpp"
#include "tdp/synth.hpp"

namespace tdp {

// Noiseless ground-truth delays for evaluation runs: same feature inputs as
// any other predictor, labels straight from the generator's mean curve.
struct OraclePredictor final : DelayPredictor {
    SyntheticOracle oracle;
    const Netlist* nl = nullptr;

    OraclePredictor(SyntheticOracle o, const Netlist& netlist) : oracle(o), nl(&netlist) {}

    std::vector<std::vector<double>> predict(const FeatureSet& fs, int batch_size,
                                             BatchStats* stats) const override {
        (void)batch_size;
        std::vector<std::vector<double>> out(fs.nets.size());
        for (size_t i = 0; i < fs.nets.size(); i++) {
            const NetFeatures& nf = fs.nets[i];
            const Net& net = nl->nets[nf.net];
            out[i].resize(nf.pins.size());
            for (size_t k = 0; k < nf.pins.size(); k++) {
                InstanceKind lk = nl->instances[net.loads[k].inst].kind;
                out[i][k] = oracle.mean_delay(nf.pins[k][0] + nf.pins[k][1], nf.env[3],
                                              nf.env[4], nf.pins[k][6], lk);
            }
            if (stats) {
                stats->nets_encoded++;
                stats->pairs_predicted += nf.pins.size();
            }
        }
        return out;
    }
};

// Ground-truth critical path delay of a placement under the oracle.
inline double oracle_cpd(const Netlist& nl, const PlacementState& pl, const Device& dev,
                         const SyntheticOracle& oracle, const LogicDelayTable& table,
                         double clock_period, int cell_size, int threads = 1) {
    TimingGraph tg = build_timing_graph(nl, table, clock_period);
    levelize(tg);
    GCellGrid grid = compute_routing_density(nl, pl, dev, cell_size);
    OraclePredictor pred(oracle, nl);
    run_sta(tg, nl, pl, dev, grid, pred, 256, cell_size, threads);
    return tg.cpd;
}

} // namespace tdp

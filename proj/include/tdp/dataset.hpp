#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "tdp/delay_model.hpp"
#include "tdp/features.hpp"
#include "tdp/synth.hpp"

namespace tdp {

// All pin pairs of one net share its graph and env features; labels follow
// the net's load order. Keeping pairs grouped by net lets training and
// inference encode each topology once.
struct SampleGroup {
    std::string net_name;
    NetFeatures nf;
    std::vector<double> labels;
};

struct Dataset {
    std::vector<SampleGroup> groups;
    size_t pair_count() const {
        size_t n = 0;
        for (const SampleGroup& g : groups) n += g.labels.size();
        return n;
    }
};

// Features at the given placement, labels from the oracle (with its noise
// stream; deterministic for a fixed seed).
inline Dataset extract_dataset(const Netlist& nl, const PlacementState& pl, const Device& dev,
                               const SyntheticOracle& oracle, int cell_size, uint64_t seed,
                               int threads = 1) {
    GCellGrid grid = compute_routing_density(nl, pl, dev, cell_size);
    FeatureSet fs = extract_features(nl, pl, dev, grid, cell_size, threads);
    if (fs.nets.empty()) throw ValidationError("extract: netlist has no nets with loads");
    Dataset ds;
    ds.groups.resize(fs.nets.size());
    Rng noise_rng(split_seed(seed, 0xda7a));
    for (size_t i = 0; i < fs.nets.size(); i++) {
        SampleGroup& g = ds.groups[i];
        g.net_name = nl.nets[fs.nets[i].net].name;
        g.nf = std::move(fs.nets[i]);
        g.labels.resize(g.nf.pins.size());
        const Net& net = nl.nets[g.nf.net];
        for (size_t k = 0; k < g.labels.size(); k++) {
            InstanceKind lk = nl.instances[net.loads[k].inst].kind;
            g.labels[k] =
                oracle.noisy_delay(g.nf.pins[k][0] + g.nf.pins[k][1], g.nf.env[3], g.nf.env[4],
                                   g.nf.pins[k][6], lk, noise_rng);
        }
    }
    return ds;
}

struct DatasetSplit {
    Dataset train, val, test;
};

// 70/15/15 split by net: every pair of a net lands in the same partition.
inline DatasetSplit split_dataset(Dataset ds, uint64_t seed) {
    size_t n = ds.groups.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; i++) order[i] = i;
    Rng rng(split_seed(seed, 0x5b117));
    std::shuffle(order.begin(), order.end(), rng);
    size_t n_train = (70 * n) / 100;
    size_t n_val = (15 * n) / 100;
    DatasetSplit sp;
    for (size_t i = 0; i < n; i++) {
        Dataset& dst = i < n_train ? sp.train : (i < n_train + n_val ? sp.val : sp.test);
        dst.groups.push_back(std::move(ds.groups[order[i]]));
    }
    return sp;
}

// JSON-lines: one record per pin pair. Records of the same net are emitted
// consecutively and regrouped on load.
inline void write_dataset(std::ostream& out, const Dataset& ds) {
    for (const SampleGroup& g : ds.groups) {
        json vertices = json::array();
        for (int r = 0; r < g.nf.graph.vx.rows(); r++) {
            json row = json::array();
            for (int c = 0; c < g.nf.graph.vx.cols(); c++) row.push_back(g.nf.graph.vx(r, c));
            vertices.push_back(std::move(row));
        }
        json edges = json::array();
        for (const GraphEdge& e : g.nf.graph.edges)
            edges.push_back(json::array({e.src, e.dst, e.type}));
        for (size_t k = 0; k < g.labels.size(); k++) {
            json j;
            j["net"] = g.net_name;
            j["vertices"] = vertices;
            j["edges"] = edges;
            j["env"] = g.nf.env;
            j["pin"] = g.nf.pins[k];
            j["delay"] = g.labels[k];
            out << j.dump() << "\n";
        }
    }
}

inline void write_dataset_file(const std::string& path, const Dataset& ds) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot write dataset file: " + path);
    write_dataset(f, ds);
}

inline Dataset read_dataset(std::istream& in) {
    Dataset ds;
    std::string line;
    int group_idx = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(std::string("dataset: malformed line: ") + e.what());
        }
        std::string net = j.at("net").get<std::string>();
        if (ds.groups.empty() || ds.groups.back().net_name != net) {
            SampleGroup g;
            g.net_name = net;
            group_idx++;
            g.nf.net = group_idx;
            const json& jv = j.at("vertices");
            g.nf.graph.vx.resize(jv.size(), kVertexFeatureDim);
            for (size_t r = 0; r < jv.size(); r++) {
                if (jv[r].size() != kVertexFeatureDim)
                    throw ValidationError("dataset: bad vertex feature width");
                for (int c = 0; c < kVertexFeatureDim; c++)
                    g.nf.graph.vx(static_cast<int>(r), c) = jv[r][c].get<double>();
            }
            for (const json& je : j.at("edges"))
                g.nf.graph.edges.push_back(
                    {je.at(0).get<int>(), je.at(1).get<int>(), je.at(2).get<int>()});
            const json& jenv = j.at("env");
            for (int c = 0; c < kEnvFeatureDim; c++) g.nf.env[c] = jenv.at(c).get<double>();
            ds.groups.push_back(std::move(g));
        }
        SampleGroup& g = ds.groups.back();
        std::array<double, kPinFeatureDim> pin;
        const json& jp = j.at("pin");
        for (int c = 0; c < kPinFeatureDim; c++) pin[c] = jp.at(c).get<double>();
        g.nf.pins.push_back(pin);
        g.labels.push_back(j.at("delay").get<double>());
    }
    if (ds.groups.empty()) throw ValidationError("dataset: no samples");
    return ds;
}

inline Dataset read_dataset_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open dataset file: " + path);
    return read_dataset(f);
}

}  // namespace tdp

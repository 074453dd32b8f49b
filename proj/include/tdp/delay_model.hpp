#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <fstream>
#include <vector>

#include "json.hpp"
#include "tdp/features.hpp"

namespace tdp {

using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelConfig {
    int conv_layers = 2;
    int hidden_dim = 64;
    int reduced_dim = 16;
    int res_blocks = 2;
    int res_dim = 32;
    double delay_floor = 0.01; // ns
    double huber_delta = 1.0;
    bool use_topology = true; // false drops the net-vertex branch entirely
};

// Huber loss on the prediction error. Quadratic inside the delta band,
// linear outside; value and slope agree at |e| = delta.
inline double huber(double e, double delta) {
    double a = std::abs(e);
    return a <= delta ? 0.5 * e * e : delta * a - 0.5 * delta * delta;
}

inline double huber_grad(double e, double delta) {
    if (e > delta) return delta;
    if (e < -delta) return -delta;
    return e;
}

struct DelayModelWeights {
    ModelConfig config;
    // conv[l][t]: typed message transform of layer l, d_in(l) x d_out(l)
    std::vector<std::array<Eigen::MatrixXd, kNumEdgeTypes>> conv;
    Eigen::MatrixXd reduce_w; // hidden -> reduced
    Eigen::VectorXd reduce_b;
    Eigen::MatrixXd fuse_w; // cat -> res_dim
    Eigen::VectorXd fuse_b;
    std::vector<Eigen::MatrixXd> res_w; // res_dim -> res_dim
    std::vector<Eigen::VectorXd> res_b;
    Eigen::VectorXd out_w; // res_dim
    double out_b = 0.0;
    // Feature standardization, frozen from the training set.
    Eigen::VectorXd vertex_mean, vertex_std;
    Eigen::VectorXd env_mean, env_std;
    Eigen::VectorXd pin_mean, pin_std;

    int cat_dim() const {
        return (config.use_topology ? config.reduced_dim : 0) + kEnvFeatureDim + kPinFeatureDim;
    }
};

inline DelayModelWeights init_weights(const ModelConfig& cfg, uint64_t seed) {
    DelayModelWeights w;
    w.config = cfg;
    Rng rng(split_seed(seed, 0x117e));
    auto glorot = [&](int rows, int cols) {
        double lim = std::sqrt(6.0 / (rows + cols));
        std::uniform_real_distribution<double> d(-lim, lim);
        Eigen::MatrixXd m(rows, cols);
        for (int i = 0; i < rows; i++)
            for (int j = 0; j < cols; j++) m(i, j) = d(rng);
        return m;
    };
    if (cfg.use_topology) {
        int din = kVertexFeatureDim;
        for (int l = 0; l < cfg.conv_layers; l++) {
            std::array<Eigen::MatrixXd, kNumEdgeTypes> layer;
            for (int t = 0; t < kNumEdgeTypes; t++) layer[t] = glorot(din, cfg.hidden_dim);
            w.conv.push_back(std::move(layer));
            din = cfg.hidden_dim;
        }
        w.reduce_w = glorot(cfg.hidden_dim, cfg.reduced_dim);
        w.reduce_b = Eigen::VectorXd::Zero(cfg.reduced_dim);
    }
    w.fuse_w = glorot(w.cat_dim(), cfg.res_dim);
    w.fuse_b = Eigen::VectorXd::Zero(cfg.res_dim);
    for (int r = 0; r < cfg.res_blocks; r++) {
        w.res_w.push_back(glorot(cfg.res_dim, cfg.res_dim));
        w.res_b.push_back(Eigen::VectorXd::Zero(cfg.res_dim));
    }
    w.out_w = glorot(cfg.res_dim, 1).col(0);
    w.out_b = 0.0;
    w.vertex_mean = Eigen::VectorXd::Zero(kVertexFeatureDim);
    w.vertex_std = Eigen::VectorXd::Ones(kVertexFeatureDim);
    w.env_mean = Eigen::VectorXd::Zero(kEnvFeatureDim);
    w.env_std = Eigen::VectorXd::Ones(kEnvFeatureDim);
    w.pin_mean = Eigen::VectorXd::Zero(kPinFeatureDim);
    w.pin_std = Eigen::VectorXd::Ones(kPinFeatureDim);
    return w;
}

// ---------------------------------------------------------------------------
// Graph encoder. Per layer and edge type t:
//   agg_t[i] = sum over edges (j -> i) of type t of v[j] / sqrt(din(i) * dout(j))
//   v' = ReLU(sum_t agg_t * W_t)
// Degrees count every incident edge regardless of type; an isolated vertex
// with only its self-loop therefore aggregates with coefficient exactly 1.
// The net embedding is the mean of the final vertex states.

inline std::vector<double> edge_norms(const NetGraph& g) {
    int p = g.vertex_count();
    std::vector<int> din(p, 0), dout(p, 0);
    for (const GraphEdge& e : g.edges) {
        din[e.dst]++;
        dout[e.src]++;
    }
    std::vector<double> w(g.edges.size());
    for (size_t i = 0; i < g.edges.size(); i++)
        w[i] = 1.0 / std::sqrt(double(din[g.edges[i].dst]) * double(dout[g.edges[i].src]));
    return w;
}

// Reference single-net encoder: plain per-edge loops, no batching.
inline Eigen::VectorXd encode_net_topology(const DelayModelWeights& w, const NetGraph& g) {
    const ModelConfig& cfg = w.config;
    int p = g.vertex_count();
    RMat v = g.vx;
    for (int i = 0; i < p; i++)
        v.row(i) = (v.row(i).transpose() - w.vertex_mean).cwiseQuotient(w.vertex_std).transpose();
    std::vector<double> en = edge_norms(g);
    for (int l = 0; l < cfg.conv_layers; l++) {
        int dout = static_cast<int>(w.conv[l][0].cols());
        std::array<RMat, kNumEdgeTypes> agg;
        for (int t = 0; t < kNumEdgeTypes; t++) agg[t] = RMat::Zero(p, v.cols());
        for (size_t e = 0; e < g.edges.size(); e++)
            agg[g.edges[e].type].row(g.edges[e].dst) += en[e] * v.row(g.edges[e].src);
        RMat z = RMat::Zero(p, dout);
        for (int t = 0; t < kNumEdgeTypes; t++) z += agg[t] * w.conv[l][t];
        v = z.cwiseMax(0.0);
    }
    return v.colwise().mean().transpose();
}

// Regression head on [y', env, pin]; returns the raw (unclamped) delay.
inline double regress_pair(const DelayModelWeights& w, const Eigen::VectorXd& cat) {
    Eigen::VectorXd h = (w.fuse_w.transpose() * cat + w.fuse_b).cwiseMax(0.0);
    for (size_t r = 0; r < w.res_w.size(); r++)
        h = (w.res_w[r].transpose() * h + w.res_b[r]).cwiseMax(0.0) + h;
    return w.out_w.dot(h) + w.out_b;
}

inline Eigen::VectorXd normalized_env(const DelayModelWeights& w,
                                      const std::array<double, kEnvFeatureDim>& env) {
    Eigen::VectorXd e(kEnvFeatureDim);
    for (int i = 0; i < kEnvFeatureDim; i++) e[i] = (env[i] - w.env_mean[i]) / w.env_std[i];
    return e;
}

inline Eigen::VectorXd normalized_pin(const DelayModelWeights& w,
                                      const std::array<double, kPinFeatureDim>& pin) {
    Eigen::VectorXd p(kPinFeatureDim);
    for (int i = 0; i < kPinFeatureDim; i++) p[i] = (pin[i] - w.pin_mean[i]) / w.pin_std[i];
    return p;
}

// Sequential reference path: one net, one load at a time.
inline std::vector<double> predict_net_delays(const DelayModelWeights& w,
                                              const NetFeatures& nf) {
    const ModelConfig& cfg = w.config;
    Eigen::VectorXd y;
    if (cfg.use_topology) {
        Eigen::VectorXd pooled = encode_net_topology(w, nf.graph);
        y = w.reduce_w.transpose() * pooled + w.reduce_b;
    }
    Eigen::VectorXd env = normalized_env(w, nf.env);
    std::vector<double> out(nf.pins.size());
    Eigen::VectorXd cat(w.cat_dim());
    for (size_t k = 0; k < nf.pins.size(); k++) {
        int off = 0;
        if (cfg.use_topology) {
            cat.segment(0, cfg.reduced_dim) = y;
            off = cfg.reduced_dim;
        }
        cat.segment(off, kEnvFeatureDim) = env;
        cat.segment(off + kEnvFeatureDim, kPinFeatureDim) = normalized_pin(w, nf.pins[k]);
        out[k] = std::max(cfg.delay_floor, regress_pair(w, cat));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Batched inference. Topology is encoded once per net; every load pair of the
// net reuses the pooled embedding in the regression batch.

struct BatchStats {
    size_t nets_encoded = 0;
    size_t pairs_predicted = 0;
};

// Forward caches, shared between inference (ignored) and training (reused by
// the backward pass in train.hpp).
struct EncodeCache {
    std::vector<int> offsets; // per-graph vertex offset; back() = total vertices
    std::vector<const NetGraph*> graphs;
    std::vector<std::vector<double>> norms; // per-graph edge norms
    RMat v0;
    std::vector<std::array<RMat, kNumEdgeTypes>> agg; // per layer
    std::vector<RMat> act;                            // per layer, post-ReLU
    RMat pooled;                                      // graphs x hidden
};

inline void encode_graph_batch(const DelayModelWeights& w,
                               const std::vector<const NetGraph*>& graphs, EncodeCache& ec) {
    const ModelConfig& cfg = w.config;
    ec.graphs = graphs;
    ec.offsets.assign(1, 0);
    for (const NetGraph* g : graphs) ec.offsets.push_back(ec.offsets.back() + g->vertex_count());
    int total = ec.offsets.back();
    int ng = static_cast<int>(graphs.size());

    ec.v0.resize(total, kVertexFeatureDim);
    ec.norms.resize(ng);
    for (int gi = 0; gi < ng; gi++) {
        const NetGraph& g = *graphs[gi];
        ec.v0.middleRows(ec.offsets[gi], g.vertex_count()) = g.vx;
        ec.norms[gi] = edge_norms(g);
    }
    for (int c = 0; c < kVertexFeatureDim; c++)
        ec.v0.col(c) = (ec.v0.col(c).array() - w.vertex_mean[c]) / w.vertex_std[c];

    ec.agg.assign(cfg.conv_layers, {});
    ec.act.assign(cfg.conv_layers, {});
    const RMat* v = &ec.v0;
    for (int l = 0; l < cfg.conv_layers; l++) {
        int din = static_cast<int>(v->cols());
        int dout = static_cast<int>(w.conv[l][0].cols());
        for (int t = 0; t < kNumEdgeTypes; t++) ec.agg[l][t] = RMat::Zero(total, din);
        for (int gi = 0; gi < ng; gi++) {
            const NetGraph& g = *graphs[gi];
            int o = ec.offsets[gi];
            for (size_t e = 0; e < g.edges.size(); e++) {
                const GraphEdge& ed = g.edges[e];
                ec.agg[l][ed.type].row(o + ed.dst) += ec.norms[gi][e] * v->row(o + ed.src);
            }
        }
        RMat z = RMat::Zero(total, dout);
        for (int t = 0; t < kNumEdgeTypes; t++) z.noalias() += ec.agg[l][t] * w.conv[l][t];
        ec.act[l] = z.cwiseMax(0.0);
        v = &ec.act[l];
    }
    ec.pooled.resize(ng, cfg.hidden_dim);
    for (int gi = 0; gi < ng; gi++)
        ec.pooled.row(gi) = ec.act[cfg.conv_layers - 1]
                                .middleRows(ec.offsets[gi], graphs[gi]->vertex_count())
                                .colwise()
                                .mean();
}

struct RegressCache {
    RMat cat;                 // pairs x cat_dim
    RMat h0;                  // post-ReLU fusion layer
    std::vector<RMat> res_in; // input of each residual block
    std::vector<RMat> res_relu;
    Eigen::VectorXd raw; // unclamped outputs
};

inline void regress_batch(const DelayModelWeights& w, RegressCache& rc) {
    rc.h0 = ((rc.cat * w.fuse_w).rowwise() + w.fuse_b.transpose()).cwiseMax(0.0);
    RMat h = rc.h0;
    rc.res_in.clear();
    rc.res_relu.clear();
    for (size_t r = 0; r < w.res_w.size(); r++) {
        rc.res_in.push_back(h);
        RMat relu = ((h * w.res_w[r]).rowwise() + w.res_b[r].transpose()).cwiseMax(0.0);
        rc.res_relu.push_back(relu);
        h = relu + h;
    }
    rc.raw = (h * w.out_w).array() + w.out_b;
}

// Assembles the regression inputs for a chunk of nets whose embeddings sit in
// `ec.pooled` (topology models) or directly from env/pin features.
inline void build_cat_rows(const DelayModelWeights& w, const std::vector<const NetFeatures*>& nets,
                           const EncodeCache* ec, RegressCache& rc) {
    const ModelConfig& cfg = w.config;
    size_t pairs = 0;
    for (const NetFeatures* nf : nets) pairs += nf->pins.size();
    rc.cat.resize(pairs, w.cat_dim());
    size_t row = 0;
    for (size_t ni = 0; ni < nets.size(); ni++) {
        const NetFeatures& nf = *nets[ni];
        Eigen::VectorXd y;
        if (cfg.use_topology) {
            y = w.reduce_w.transpose() * ec->pooled.row(ni).transpose() + w.reduce_b;
        }
        Eigen::VectorXd env = normalized_env(w, nf.env);
        for (size_t k = 0; k < nf.pins.size(); k++, row++) {
            int off = 0;
            if (cfg.use_topology) {
                rc.cat.row(row).segment(0, cfg.reduced_dim) = y.transpose();
                off = cfg.reduced_dim;
            }
            rc.cat.row(row).segment(off, kEnvFeatureDim) = env.transpose();
            rc.cat.row(row).segment(off + kEnvFeatureDim, kPinFeatureDim) =
                normalized_pin(w, nf.pins[k]).transpose();
        }
    }
}

// Batched prediction over a whole feature set. Chunks are sized so each holds
// roughly batch_size pin pairs; every net's topology is encoded exactly once.
inline std::vector<std::vector<double>> batched_net_delays(const DelayModelWeights& w,
                                                           const FeatureSet& fs, int batch_size,
                                                           BatchStats* stats = nullptr) {
    if (batch_size <= 0) batch_size = 256;
    std::vector<std::vector<double>> out(fs.nets.size());
    size_t i = 0;
    while (i < fs.nets.size()) {
        size_t j = i, pairs = 0;
        while (j < fs.nets.size() && (j == i || pairs + fs.nets[j].pins.size() <=
                                                     static_cast<size_t>(batch_size))) {
            pairs += fs.nets[j].pins.size();
            j++;
        }
        std::vector<const NetFeatures*> chunk;
        std::vector<const NetGraph*> graphs;
        for (size_t k = i; k < j; k++) {
            chunk.push_back(&fs.nets[k]);
            graphs.push_back(&fs.nets[k].graph);
        }
        EncodeCache ec;
        if (w.config.use_topology) {
            encode_graph_batch(w, graphs, ec);
            if (stats) stats->nets_encoded += graphs.size();
        } else if (stats) {
            stats->nets_encoded += graphs.size();
        }
        RegressCache rc;
        build_cat_rows(w, chunk, &ec, rc);
        regress_batch(w, rc);
        if (stats) stats->pairs_predicted += static_cast<size_t>(rc.raw.size());
        size_t row = 0;
        for (size_t k = i; k < j; k++) {
            out[k].resize(fs.nets[k].pins.size());
            for (size_t p = 0; p < out[k].size(); p++, row++)
                out[k][p] = std::max(w.config.delay_floor, rc.raw[row]);
        }
        i = j;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Predictor plug for the timing engine.

struct DelayPredictor {
    virtual ~DelayPredictor() = default;
    virtual std::vector<std::vector<double>> predict(const FeatureSet& fs, int batch_size,
                                                     BatchStats* stats = nullptr) const = 0;
};

struct GraphDelayModel final : DelayPredictor {
    DelayModelWeights weights;
    explicit GraphDelayModel(DelayModelWeights w) : weights(std::move(w)) {}
    std::vector<std::vector<double>> predict(const FeatureSet& fs, int batch_size,
                                             BatchStats* stats) const override {
        return batched_net_delays(weights, fs, batch_size, stats);
    }
};

// Affine model over (|dx|+|dy|, fanout, avg routing density, avg pin density).
struct LinearBaseline {
    double c0 = 0, c_dist = 0, c_fanout = 0, c_ard = 0, c_apd = 0;
    double delay_floor = 0.01;

    double predict(double dist, double fanout, double ard, double apd) const {
        return std::max(delay_floor,
                        c0 + c_dist * dist + c_fanout * fanout + c_ard * ard + c_apd * apd);
    }
};

inline LinearBaseline fit_linear_baseline(const std::vector<std::array<double, 4>>& feats,
                                          const std::vector<double>& y) {
    if (feats.size() != y.size() || feats.empty())
        throw NumericError("linear baseline: empty or mismatched training data");
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(5, 5);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(5);
    Eigen::VectorXd row(5);
    for (size_t i = 0; i < feats.size(); i++) {
        row << 1.0, feats[i][0], feats[i][1], feats[i][2], feats[i][3];
        xtx.noalias() += row * row.transpose();
        xty.noalias() += row * y[i];
    }
    Eigen::VectorXd c = xtx.ldlt().solve(xty);
    if (!c.allFinite()) throw NumericError("linear baseline: singular normal equations");
    LinearBaseline b;
    b.c0 = c[0];
    b.c_dist = c[1];
    b.c_fanout = c[2];
    b.c_ard = c[3];
    b.c_apd = c[4];
    return b;
}

struct LinearDelayModel final : DelayPredictor {
    LinearBaseline base;
    explicit LinearDelayModel(LinearBaseline b) : base(b) {}
    std::vector<std::vector<double>> predict(const FeatureSet& fs, int batch_size,
                                             BatchStats* stats) const override {
        (void)batch_size;
        std::vector<std::vector<double>> out(fs.nets.size());
        for (size_t i = 0; i < fs.nets.size(); i++) {
            const NetFeatures& nf = fs.nets[i];
            out[i].resize(nf.pins.size());
            for (size_t k = 0; k < nf.pins.size(); k++)
                out[i][k] = base.predict(nf.pins[k][0] + nf.pins[k][1], nf.env[3], nf.env[4],
                                         nf.pins[k][6]);
            if (stats) {
                stats->nets_encoded++;
                stats->pairs_predicted += nf.pins.size();
            }
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Weight serialization: {"format_version":1, "config":{...}, "tensors":
// {name: [[rows, cols], [row-major values]]}}.

namespace detail {

inline json tensor_json(const Eigen::MatrixXd& m) {
    json vals = json::array();
    for (int i = 0; i < m.rows(); i++)
        for (int j = 0; j < m.cols(); j++) vals.push_back(m(i, j));
    return json::array({json::array({m.rows(), m.cols()}), std::move(vals)});
}

inline Eigen::MatrixXd tensor_from_json(const json& j) {
    auto dims = j.at(0);
    Eigen::MatrixXd m(dims.at(0).get<int>(), dims.at(1).get<int>());
    const json& vals = j.at(1);
    if (static_cast<int>(vals.size()) != m.rows() * m.cols())
        throw ValidationError("weights: tensor size mismatch");
    int idx = 0;
    for (int i = 0; i < m.rows(); i++)
        for (int j2 = 0; j2 < m.cols(); j2++) m(i, j2) = vals.at(idx++).get<double>();
    return m;
}

}  // namespace detail

inline std::string serialize_weights(const DelayModelWeights& w) {
    json j;
    j["format_version"] = 1;
    j["config"] = {{"conv_layers", w.config.conv_layers},
                   {"hidden_dim", w.config.hidden_dim},
                   {"reduced_dim", w.config.reduced_dim},
                   {"res_blocks", w.config.res_blocks},
                   {"res_dim", w.config.res_dim},
                   {"delay_floor", w.config.delay_floor},
                   {"huber_delta", w.config.huber_delta},
                   {"use_topology", w.config.use_topology}};
    json t;
    for (size_t l = 0; l < w.conv.size(); l++)
        for (int ty = 0; ty < kNumEdgeTypes; ty++)
            t["conv" + std::to_string(l) + "_t" + std::to_string(ty)] =
                detail::tensor_json(w.conv[l][ty]);
    if (w.config.use_topology) {
        t["reduce_w"] = detail::tensor_json(w.reduce_w);
        t["reduce_b"] = detail::tensor_json(w.reduce_b);
    }
    t["fuse_w"] = detail::tensor_json(w.fuse_w);
    t["fuse_b"] = detail::tensor_json(w.fuse_b);
    for (size_t r = 0; r < w.res_w.size(); r++) {
        t["res" + std::to_string(r) + "_w"] = detail::tensor_json(w.res_w[r]);
        t["res" + std::to_string(r) + "_b"] = detail::tensor_json(w.res_b[r]);
    }
    t["out_w"] = detail::tensor_json(w.out_w);
    t["out_b"] = detail::tensor_json(Eigen::MatrixXd::Constant(1, 1, w.out_b));
    t["vertex_mean"] = detail::tensor_json(w.vertex_mean);
    t["vertex_std"] = detail::tensor_json(w.vertex_std);
    t["env_mean"] = detail::tensor_json(w.env_mean);
    t["env_std"] = detail::tensor_json(w.env_std);
    t["pin_mean"] = detail::tensor_json(w.pin_mean);
    t["pin_std"] = detail::tensor_json(w.pin_std);
    j["tensors"] = std::move(t);
    return j.dump() + "\n";
}

inline DelayModelWeights parse_weights(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("weights: malformed JSON: ") + e.what());
    }
    if (j.value("format_version", 0) != 1)
        throw ValidationError("weights: unsupported format_version");
    ModelConfig cfg;
    const json& jc = j.at("config");
    cfg.conv_layers = jc.at("conv_layers").get<int>();
    cfg.hidden_dim = jc.at("hidden_dim").get<int>();
    cfg.reduced_dim = jc.at("reduced_dim").get<int>();
    cfg.res_blocks = jc.at("res_blocks").get<int>();
    cfg.res_dim = jc.at("res_dim").get<int>();
    cfg.delay_floor = jc.at("delay_floor").get<double>();
    cfg.huber_delta = jc.at("huber_delta").get<double>();
    cfg.use_topology = jc.at("use_topology").get<bool>();

    DelayModelWeights w;
    w.config = cfg;
    const json& t = j.at("tensors");
    if (cfg.use_topology) {
        for (int l = 0; l < cfg.conv_layers; l++) {
            std::array<Eigen::MatrixXd, kNumEdgeTypes> layer;
            for (int ty = 0; ty < kNumEdgeTypes; ty++)
                layer[ty] = detail::tensor_from_json(
                    t.at("conv" + std::to_string(l) + "_t" + std::to_string(ty)));
            w.conv.push_back(std::move(layer));
        }
        w.reduce_w = detail::tensor_from_json(t.at("reduce_w"));
        w.reduce_b = detail::tensor_from_json(t.at("reduce_b")).col(0);
    }
    w.fuse_w = detail::tensor_from_json(t.at("fuse_w"));
    w.fuse_b = detail::tensor_from_json(t.at("fuse_b")).col(0);
    for (int r = 0; r < cfg.res_blocks; r++) {
        w.res_w.push_back(detail::tensor_from_json(t.at("res" + std::to_string(r) + "_w")));
        w.res_b.push_back(detail::tensor_from_json(t.at("res" + std::to_string(r) + "_b")).col(0));
    }
    w.out_w = detail::tensor_from_json(t.at("out_w")).col(0);
    w.out_b = detail::tensor_from_json(t.at("out_b"))(0, 0);
    w.vertex_mean = detail::tensor_from_json(t.at("vertex_mean")).col(0);
    w.vertex_std = detail::tensor_from_json(t.at("vertex_std")).col(0);
    w.env_mean = detail::tensor_from_json(t.at("env_mean")).col(0);
    w.env_std = detail::tensor_from_json(t.at("env_std")).col(0);
    w.pin_mean = detail::tensor_from_json(t.at("pin_mean")).col(0);
    w.pin_std = detail::tensor_from_json(t.at("pin_std")).col(0);
    return w;
}

inline DelayModelWeights load_weights_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open weights file: " + path);
    return parse_weights(f);
}

inline void save_weights_file(const std::string& path, const DelayModelWeights& w) {
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot write weights file: " + path);
    f << serialize_weights(w);
}

}  // namespace tdp

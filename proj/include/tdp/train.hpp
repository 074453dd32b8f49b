#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tdp/dataset.hpp"
#include "tdp/delay_model.hpp"

namespace tdp {

struct TrainConfig {
    int max_epochs = 200;
    int batch_size = 256; // pin pairs per step, whole nets only
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int patience = 20; // epochs without val improvement before stopping
    uint64_t seed = 1;
};

// Flat views over every trainable tensor, in a fixed order shared by the
// optimizer and the finite-difference checks. Frozen feature stats are
// deliberately absent.
inline std::vector<Eigen::Map<Eigen::VectorXd>> param_views(DelayModelWeights& w) {
    std::vector<Eigen::Map<Eigen::VectorXd>> out;
    for (auto& layer : w.conv)
        for (auto& m : layer) out.emplace_back(m.data(), m.size());
    if (w.config.use_topology) {
        out.emplace_back(w.reduce_w.data(), w.reduce_w.size());
        out.emplace_back(w.reduce_b.data(), w.reduce_b.size());
    }
    out.emplace_back(w.fuse_w.data(), w.fuse_w.size());
    out.emplace_back(w.fuse_b.data(), w.fuse_b.size());
    for (auto& m : w.res_w) out.emplace_back(m.data(), m.size());
    for (auto& v : w.res_b) out.emplace_back(v.data(), v.size());
    out.emplace_back(w.out_w.data(), w.out_w.size());
    out.emplace_back(&w.out_b, 1);
    return out;
}

inline DelayModelWeights zeroed_like(const DelayModelWeights& w) {
    DelayModelWeights g = w;
    for (auto& v : param_views(g)) v.setZero();
    return g;
}

namespace detail {

struct ForwardCaches {
    EncodeCache ec;
    RegressCache rc;
};

inline void forward_batch(const DelayModelWeights& w, const std::vector<const SampleGroup*>& batch,
                          ForwardCaches& fc) {
    std::vector<const NetFeatures*> nets;
    nets.reserve(batch.size());
    for (const SampleGroup* g : batch) nets.push_back(&g->nf);
    if (w.config.use_topology) {
        std::vector<const NetGraph*> graphs;
        graphs.reserve(batch.size());
        for (const SampleGroup* g : batch) graphs.push_back(&g->nf.graph);
        encode_graph_batch(w, graphs, fc.ec);
    }
    build_cat_rows(w, nets, &fc.ec, fc.rc);
    regress_batch(w, fc.rc);
}

} // namespace detail

// Mean Huber loss of one batch; predictions are the raw head outputs so the
// loss surface has no clamp kink.
inline double batch_loss(const DelayModelWeights& w, const std::vector<const SampleGroup*>& batch) {
    detail::ForwardCaches fc;
    detail::forward_batch(w, batch, fc);
    double loss = 0;
    int row = 0;
    for (const SampleGroup* g : batch)
        for (double label : g->labels) loss += huber(fc.rc.raw[row++] - label, w.config.huber_delta);
    return loss / std::max(1, row);
}

// Same loss, plus dloss/dtheta accumulated into `grads` (pre-zeroed by the
// caller). Backpropagates through the residual head, the fusion layer and,
// for topology models, pooling and every conv layer.
inline double batch_loss_and_grads(const DelayModelWeights& w,
                                   const std::vector<const SampleGroup*>& batch,
                                   DelayModelWeights& grads) {
    const ModelConfig& cfg = w.config;
    detail::ForwardCaches fc;
    detail::forward_batch(w, batch, fc);
    const RegressCache& rc = fc.rc;
    const int pairs = static_cast<int>(rc.raw.size());

    double loss = 0;
    Eigen::VectorXd draw(pairs);
    {
        int row = 0;
        for (const SampleGroup* g : batch)
            for (double label : g->labels) {
                double e = rc.raw[row] - label;
                loss += huber(e, cfg.huber_delta);
                draw[row++] = huber_grad(e, cfg.huber_delta);
            }
    }
    loss /= pairs;
    draw /= pairs;

    // head: raw = h_last * out_w + out_b
    const RMat& h_last = rc.res_in.empty() ? rc.h0 : RMat(rc.res_relu.back() + rc.res_in.back());
    grads.out_b += draw.sum();
    grads.out_w.noalias() += h_last.transpose() * draw;
    RMat dh = draw * w.out_w.transpose();

    for (int r = static_cast<int>(w.res_w.size()) - 1; r >= 0; r--) {
        RMat drelu = (rc.res_relu[r].array() > 0.0).select(dh, 0.0);
        grads.res_w[r].noalias() += rc.res_in[r].transpose() * drelu;
        grads.res_b[r].noalias() += drelu.colwise().sum().transpose();
        dh += drelu * w.res_w[r].transpose(); // skip path + transformed path
    }
    RMat dpre = (rc.h0.array() > 0.0).select(dh, 0.0);
    grads.fuse_w.noalias() += rc.cat.transpose() * dpre;
    grads.fuse_b.noalias() += dpre.colwise().sum().transpose();

    if (!cfg.use_topology) return loss;

    RMat dcat = dpre * w.fuse_w.transpose();
    const EncodeCache& ec = fc.ec;
    int ng = static_cast<int>(batch.size());
    RMat dy = RMat::Zero(ng, cfg.reduced_dim);
    {
        int row = 0;
        for (int gi = 0; gi < ng; gi++) {
            int np = static_cast<int>(batch[gi]->labels.size());
            dy.row(gi) = dcat.block(row, 0, np, cfg.reduced_dim).colwise().sum();
            row += np;
        }
    }
    grads.reduce_w.noalias() += ec.pooled.transpose() * dy;
    grads.reduce_b.noalias() += dy.colwise().sum().transpose();
    RMat dpooled = dy * w.reduce_w.transpose();

    int total = ec.offsets.back();
    RMat dact(total, cfg.hidden_dim);
    for (int gi = 0; gi < ng; gi++) {
        int p = ec.graphs[gi]->vertex_count();
        dact.middleRows(ec.offsets[gi], p) = (dpooled.row(gi) / p).replicate(p, 1);
    }
    for (int l = cfg.conv_layers - 1; l >= 0; l--) {
        RMat dz = (ec.act[l].array() > 0.0).select(dact, 0.0);
        int din = static_cast<int>(w.conv[l][0].rows());
        RMat dprev = RMat::Zero(total, din);
        for (int t = 0; t < kNumEdgeTypes; t++) {
            grads.conv[l][t].noalias() += ec.agg[l][t].transpose() * dz;
            RMat dagg = dz * w.conv[l][t].transpose();
            for (int gi = 0; gi < ng; gi++) {
                const NetGraph& g = *ec.graphs[gi];
                int o = ec.offsets[gi];
                for (size_t e = 0; e < g.edges.size(); e++) {
                    const GraphEdge& ed = g.edges[e];
                    if (ed.type == t) dprev.row(o + ed.src) += ec.norms[gi][e] * dagg.row(o + ed.dst);
                }
            }
        }
        dact = std::move(dprev); // input features carry no parameters below l=0
    }
    return loss;
}

struct AdamState {
    std::vector<Eigen::VectorXd> m, v;
    long step = 0;
};

inline void adam_step(std::vector<Eigen::Map<Eigen::VectorXd>>& params,
                      std::vector<Eigen::Map<Eigen::VectorXd>>& grads, AdamState& st,
                      const TrainConfig& tc) {
    if (st.m.empty()) {
        for (auto& p : params) {
            st.m.push_back(Eigen::VectorXd::Zero(p.size()));
            st.v.push_back(Eigen::VectorXd::Zero(p.size()));
        }
    }
    st.step++;
    double bc1 = 1.0 - std::pow(tc.beta1, double(st.step));
    double bc2 = 1.0 - std::pow(tc.beta2, double(st.step));
    for (size_t i = 0; i < params.size(); i++) {
        st.m[i] = tc.beta1 * st.m[i] + (1.0 - tc.beta1) * grads[i];
        st.v[i] = tc.beta2 * st.v[i].array() + (1.0 - tc.beta2) * grads[i].array().square();
        params[i].array() -=
            tc.lr * (st.m[i].array() / bc1) / ((st.v[i].array() / bc2).sqrt() + tc.adam_eps);
    }
}

// Standardization stats from the training split. Constant columns (unused
// one-hot kinds and the like) keep std 1 so they pass through centered.
inline void fit_feature_stats(const Dataset& ds, DelayModelWeights& w) {
    auto finish = [](Eigen::VectorXd& mean, Eigen::VectorXd& sq, double n) {
        mean /= n;
        for (int i = 0; i < mean.size(); i++) {
            double var = sq[i] / n - mean[i] * mean[i];
            sq[i] = var > 1e-12 ? std::sqrt(var) : 1.0;
        }
    };
    Eigen::VectorXd vm = Eigen::VectorXd::Zero(kVertexFeatureDim);
    Eigen::VectorXd vs = Eigen::VectorXd::Zero(kVertexFeatureDim);
    Eigen::VectorXd em = Eigen::VectorXd::Zero(kEnvFeatureDim);
    Eigen::VectorXd es = Eigen::VectorXd::Zero(kEnvFeatureDim);
    Eigen::VectorXd pm = Eigen::VectorXd::Zero(kPinFeatureDim);
    Eigen::VectorXd ps = Eigen::VectorXd::Zero(kPinFeatureDim);
    double nv = 0, ne = 0, np = 0;
    for (const SampleGroup& g : ds.groups) {
        for (int r = 0; r < g.nf.graph.vx.rows(); r++) {
            vm += g.nf.graph.vx.row(r).transpose();
            vs += g.nf.graph.vx.row(r).array().square().matrix().transpose();
            nv++;
        }
        for (int c = 0; c < kEnvFeatureDim; c++) {
            em[c] += g.nf.env[c];
            es[c] += g.nf.env[c] * g.nf.env[c];
        }
        ne++;
        for (const auto& pin : g.nf.pins) {
            for (int c = 0; c < kPinFeatureDim; c++) {
                pm[c] += pin[c];
                ps[c] += pin[c] * pin[c];
            }
            np++;
        }
    }
    if (nv == 0 || np == 0) throw ValidationError("feature stats: empty dataset");
    finish(vm, vs, nv);
    finish(em, es, ne);
    finish(pm, ps, np);
    w.vertex_mean = vm;
    w.vertex_std = vs;
    w.env_mean = em;
    w.env_std = es;
    w.pin_mean = pm;
    w.pin_std = ps;
}

struct EvalResult {
    double mae = 0;
    double r2 = 0;
};

// Deployment-path evaluation: clamped predictions, nets batched.
inline EvalResult evaluate_model(const DelayModelWeights& w, const Dataset& ds, int batch_size) {
    double sum_y = 0;
    size_t n = 0;
    for (const SampleGroup& g : ds.groups)
        for (double y : g.labels) {
            sum_y += y;
            n++;
        }
    if (n == 0) throw ValidationError("evaluate: empty dataset");
    double mean_y = sum_y / double(n);

    double abs_err = 0, ss_res = 0, ss_tot = 0;
    size_t i = 0;
    while (i < ds.groups.size()) {
        size_t j = i, pairs = 0;
        while (j < ds.groups.size() &&
               (j == i || pairs + ds.groups[j].labels.size() <= static_cast<size_t>(batch_size))) {
            pairs += ds.groups[j].labels.size();
            j++;
        }
        std::vector<const SampleGroup*> batch;
        for (size_t k = i; k < j; k++) batch.push_back(&ds.groups[k]);
        detail::ForwardCaches fc;
        detail::forward_batch(w, batch, fc);
        int row = 0;
        for (const SampleGroup* g : batch)
            for (double y : g->labels) {
                double pred = std::max(w.config.delay_floor, fc.rc.raw[row++]);
                abs_err += std::abs(pred - y);
                ss_res += (pred - y) * (pred - y);
                ss_tot += (y - mean_y) * (y - mean_y);
            }
        i = j;
    }
    EvalResult r;
    r.mae = abs_err / double(n);
    r.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
    return r;
}

inline EvalResult evaluate_baseline(const LinearBaseline& b, const Dataset& ds) {
    double sum_y = 0;
    size_t n = 0;
    for (const SampleGroup& g : ds.groups)
        for (double y : g.labels) {
            sum_y += y;
            n++;
        }
    if (n == 0) throw ValidationError("evaluate: empty dataset");
    double mean_y = sum_y / double(n);
    double abs_err = 0, ss_res = 0, ss_tot = 0;
    for (const SampleGroup& g : ds.groups)
        for (size_t k = 0; k < g.labels.size(); k++) {
            double pred = b.predict(g.nf.pins[k][0] + g.nf.pins[k][1], g.nf.env[3], g.nf.env[4],
                                    g.nf.pins[k][6]);
            abs_err += std::abs(pred - g.labels[k]);
            ss_res += (pred - g.labels[k]) * (pred - g.labels[k]);
            ss_tot += (g.labels[k] - mean_y) * (g.labels[k] - mean_y);
        }
    EvalResult r;
    r.mae = abs_err / double(n);
    r.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
    return r;
}

inline LinearBaseline fit_baseline(const Dataset& ds) {
    std::vector<std::array<double, 4>> feats;
    std::vector<double> y;
    for (const SampleGroup& g : ds.groups)
        for (size_t k = 0; k < g.labels.size(); k++) {
            feats.push_back({g.nf.pins[k][0] + g.nf.pins[k][1], g.nf.env[3], g.nf.env[4],
                             g.nf.pins[k][6]});
            y.push_back(g.labels[k]);
        }
    return fit_linear_baseline(feats, y);
}

struct EpochLog {
    int epoch = 0;
    double train_loss = 0;
    double val_mae = 0;
};

struct TrainResult {
    DelayModelWeights weights; // best-val checkpoint
    std::vector<EpochLog> history;
    int best_epoch = 0;
    double best_val_mae = 0;
};

inline TrainResult train_model(const Dataset& train, const Dataset& val, const ModelConfig& mc,
                               const TrainConfig& tc) {
    if (train.groups.empty() || val.groups.empty())
        throw ValidationError("train: empty train or val split");
    DelayModelWeights w = init_weights(mc, tc.seed);
    fit_feature_stats(train, w);
    {
        double sum = 0;
        size_t n = 0;
        for (const SampleGroup& g : train.groups)
            for (double y : g.labels) {
                sum += y;
                n++;
            }
        w.out_b = sum / double(n); // start predictions at the label mean
    }

    std::vector<size_t> order(train.groups.size());
    for (size_t i = 0; i < order.size(); i++) order[i] = i;
    Rng rng(split_seed(tc.seed, 0xba7c));

    AdamState adam;
    TrainResult res;
    res.weights = w;
    res.best_val_mae = std::numeric_limits<double>::infinity();
    res.best_epoch = 0;

    for (int epoch = 1; epoch <= tc.max_epochs; epoch++) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0;
        size_t epoch_pairs = 0;
        size_t i = 0;
        while (i < order.size()) {
            size_t j = i, pairs = 0;
            while (j < order.size() &&
                   (j == i || pairs + train.groups[order[j]].labels.size() <=
                                  static_cast<size_t>(tc.batch_size))) {
                pairs += train.groups[order[j]].labels.size();
                j++;
            }
            std::vector<const SampleGroup*> batch;
            for (size_t k = i; k < j; k++) batch.push_back(&train.groups[order[k]]);
            DelayModelWeights grads = zeroed_like(w);
            double loss = batch_loss_and_grads(w, batch, grads);
            if (!std::isfinite(loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
            auto pv = param_views(w);
            auto gv = param_views(grads);
            adam_step(pv, gv, adam, tc);
            epoch_loss += loss * double(pairs);
            epoch_pairs += pairs;
            i = j;
        }
        double val_mae = evaluate_model(w, val, tc.batch_size).mae;
        res.history.push_back({epoch, epoch_loss / double(epoch_pairs), val_mae});
        if (val_mae < res.best_val_mae) {
            res.best_val_mae = val_mae;
            res.best_epoch = epoch;
            res.weights = w;
        }
        if (epoch - res.best_epoch >= tc.patience) break;
    }
    return res;
}

} // namespace tdp

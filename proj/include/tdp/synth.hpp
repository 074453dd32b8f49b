#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "json.hpp"
#include "tdp/netlist.hpp"

namespace tdp {

// Ground-truth delay function for synthetic designs: affine in Manhattan
// distance with a fanout-dependent slope, plus congestion terms, a per-kind
// load offset (hard blocks are slower to reach), and Gaussian label noise.
struct SyntheticOracle {
    double a0 = 0.1;
    double a_dist = 0.01;
    double a_fanout = 0.004; // multiplies log1p(fanout) * dist
    double a_ard = 0.002;
    double a_apd = 0.001;
    double noise_sigma = 0.02;
    double delay_floor = 0.01;
    double kind_scale = 1.0; // 0 disables the load-kind term
    uint64_t seed = 1;

    static constexpr std::array<double, kNumInstanceKinds> kKindCoef = {
        0.02,  // LUT
        0.0,   // FF
        0.12,  // DSP
        0.15,  // RAMB
        0.03,  // MUX
        0.05,  // IO
        0.0,   // ClockBuffer
        0.01,  // CARRY8
        0.04,  // Shifter
        0.08,  // LUTRAM
    };

    double mean_delay(double dist, double fanout, double ard, double apd,
                      InstanceKind load_kind) const {
        double d = a0 + a_dist * dist + a_fanout * std::log1p(fanout) * dist + a_ard * ard +
                   a_apd * apd + kind_scale * kKindCoef[static_cast<int>(load_kind)];
        return std::max(delay_floor, d);
    }

    double noisy_delay(double dist, double fanout, double ard, double apd,
                       InstanceKind load_kind, Rng& rng) const {
        std::normal_distribution<double> noise(0.0, noise_sigma);
        double d = mean_delay(dist, fanout, ard, apd, load_kind);
        if (noise_sigma > 0) d += noise(rng);
        return std::max(delay_floor, d);
    }
};

inline std::string serialize_oracle(const SyntheticOracle& o) {
    json j;
    j["a0"] = o.a0;
    j["a_dist"] = o.a_dist;
    j["a_fanout"] = o.a_fanout;
    j["a_ard"] = o.a_ard;
    j["a_apd"] = o.a_apd;
    j["noise_sigma"] = o.noise_sigma;
    j["delay_floor"] = o.delay_floor;
    j["kind_scale"] = o.kind_scale;
    j["seed"] = o.seed;
    return j.dump(2) + "\n";
}

inline SyntheticOracle parse_oracle(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("oracle: malformed JSON: ") + e.what());
    }
    SyntheticOracle o;
    o.a0 = j.value("a0", o.a0);
    o.a_dist = j.value("a_dist", o.a_dist);
    o.a_fanout = j.value("a_fanout", o.a_fanout);
    o.a_ard = j.value("a_ard", o.a_ard);
    o.a_apd = j.value("a_apd", o.a_apd);
    o.noise_sigma = j.value("noise_sigma", o.noise_sigma);
    o.delay_floor = j.value("delay_floor", o.delay_floor);
    o.kind_scale = j.value("kind_scale", o.kind_scale);
    o.seed = j.value("seed", o.seed);
    return o;
}

inline SyntheticOracle load_oracle_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open oracle file: " + path);
    return parse_oracle(f);
}

// Device sized for a given design: LUT supply at least ~2.2x the expected LUT
// count so spreading always has headroom.
inline Device default_device_for(int cells) {
    Device dev;
    int w = 24;
    while (double(w) * w * 4.0 < 2.2 * 0.55 * cells + 800.0) w += 8;
    dev.width = dev.height = w;
    dev.cr_rows = 2;
    dev.cr_cols = 2;
    dev.capacity = {{InstanceKind::LUT, 4},    {InstanceKind::FF, 4},
                    {InstanceKind::MUX, 2},    {InstanceKind::CARRY8, 2},
                    {InstanceKind::LUTRAM, 2}, {InstanceKind::Shifter, 2},
                    {InstanceKind::DSP, 1},    {InstanceKind::RAMB, 1}};
    dev.clock_capacity = 24;
    return dev;
}

struct SynthResult {
    Netlist netlist;
    Device device;
    SyntheticOracle oracle;
};

// Random layered DAG with sequential ranks every 4..12 combinational levels,
// geometric fanout, fixed perimeter IOs, and 1..3 clock domains. The result
// always passes validate() against the returned device.
inline SynthResult synth_design(int cells, uint64_t seed, const Device* user_dev = nullptr,
                                double fanout_mean = 3.0) {
    if (cells < 10) throw ValidationError("synth: need at least 10 cells");
    SynthResult res;
    res.device = user_dev ? *user_dev : default_device_for(cells);
    const Device& dev = res.device;
    Netlist& nl = res.netlist;
    Rng rng(split_seed(seed, 0x5e1f));

    int n_clocks = 1 + static_cast<int>(rng() % 3);
    int n_io = std::max(8, (cells * 3) / 100);
    n_io += n_io % 2;
    int budget = std::max(0, cells - n_io - n_clocks);
    auto part = [&](double f) { return static_cast<int>(budget * f); };
    int n_ff = part(0.28), n_mux = part(0.05), n_carry = part(0.03), n_lutram = part(0.02);
    int n_shift = part(0.015), n_dsp = part(0.015), n_ramb = part(0.015);
    int n_lut = budget - n_ff - n_mux - n_carry - n_lutram - n_shift - n_dsp - n_ramb;

    auto add_inst = [&](InstanceKind kind) {
        Instance inst;
        inst.id = static_cast<int>(nl.instances.size());
        inst.name = "i" + std::to_string(inst.id);
        inst.kind = kind;
        inst.sequential = default_sequential(kind);
        nl.inst_by_name[inst.name] = inst.id;
        nl.instances.push_back(inst);
        return inst.id;
    };

    // Interleave combinational kinds deterministically so levels get a mix.
    std::vector<InstanceKind> comb_kinds;
    for (int i = 0; i < n_lut; i++) comb_kinds.push_back(InstanceKind::LUT);
    for (int i = 0; i < n_mux; i++) comb_kinds.push_back(InstanceKind::MUX);
    for (int i = 0; i < n_carry; i++) comb_kinds.push_back(InstanceKind::CARRY8);
    for (int i = 0; i < n_lutram; i++) comb_kinds.push_back(InstanceKind::LUTRAM);
    for (int i = 0; i < n_shift; i++) comb_kinds.push_back(InstanceKind::Shifter);
    std::shuffle(comb_kinds.begin(), comb_kinds.end(), rng);
    std::vector<InstanceKind> seq_kinds;
    for (int i = 0; i < n_ff; i++) seq_kinds.push_back(InstanceKind::FF);
    for (int i = 0; i < n_dsp; i++) seq_kinds.push_back(InstanceKind::DSP);
    for (int i = 0; i < n_ramb; i++) seq_kinds.push_back(InstanceKind::RAMB);
    std::shuffle(seq_kinds.begin(), seq_kinds.end(), rng);

    // Input IOs.
    std::vector<int> io_in, io_out;
    for (int i = 0; i < n_io / 2; i++) io_in.push_back(add_inst(InstanceKind::IO));

    // Comb levels grouped into stages of 4..12 levels, a sequential rank after
    // each stage.
    int comb_total = static_cast<int>(comb_kinds.size());
    int width = std::clamp(static_cast<int>(std::lround(std::sqrt(double(comb_total)))), 2, 96);
    int n_levels = (comb_total + width - 1) / width;
    std::vector<std::vector<int>> levels;
    {
        int next = 0;
        for (int l = 0; l < n_levels; l++) {
            std::vector<int> lv;
            for (int k = 0; k < width && next < comb_total; k++, next++)
                lv.push_back(add_inst(comb_kinds[next]));
            if (!lv.empty()) levels.push_back(std::move(lv));
        }
    }
    n_levels = static_cast<int>(levels.size());

    std::vector<int> stage_end; // level index one past each stage
    {
        std::uniform_int_distribution<int> depth(4, 12);
        int at = 0;
        while (at < n_levels) {
            at = std::min(n_levels, at + depth(rng));
            stage_end.push_back(at);
        }
        if (stage_end.empty()) stage_end.push_back(0);
    }
    int n_stages = static_cast<int>(stage_end.size());

    // Sequential ranks, one after each stage.
    std::vector<std::vector<int>> ranks(n_stages);
    for (size_t i = 0; i < seq_kinds.size(); i++)
        ranks[i % n_stages].push_back(-1); // placeholder, filled next in stage order
    {
        size_t idx = 0;
        for (int s = 0; s < n_stages; s++)
            for (int& slot : ranks[s]) slot = add_inst(seq_kinds[idx++]);
    }

    for (int i = 0; i < n_io / 2; i++) io_out.push_back(add_inst(InstanceKind::IO));
    std::vector<int> clkbufs;
    for (int c = 0; c < n_clocks; c++) clkbufs.push_back(add_inst(InstanceKind::ClockBuffer));

    // Clock domains: FFs and hard blocks mostly on clk0.
    for (int c = 0; c < n_clocks; c++) nl.clocks.push_back("clk" + std::to_string(c));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int s = 0; s < n_stages; s++)
        for (int id : ranks[s]) {
            int c = 0;
            if (n_clocks > 1 && uni(rng) > 0.8)
                c = 1 + static_cast<int>(rng() % uint64_t(n_clocks - 1));
            nl.instances[id].clock = c;
        }
    for (int c = 0; c < n_clocks; c++) nl.instances[clkbufs[c]].clock = c;

    // Fixed placement: IOs spaced around the perimeter, clock buffers on the
    // center column.
    {
        std::vector<int> fixed = io_in;
        fixed.insert(fixed.end(), io_out.begin(), io_out.end());
        double perim = 2.0 * dev.width + 2.0 * dev.height;
        for (size_t i = 0; i < fixed.size(); i++) {
            double t = perim * double(i) / double(fixed.size());
            Instance& inst = nl.instances[fixed[i]];
            inst.fixed = true;
            inst.has_pos = true;
            if (t < dev.width) {
                inst.x = t;
                inst.y = 0;
            } else if (t < dev.width + dev.height) {
                inst.x = dev.width - 1;
                inst.y = t - dev.width;
            } else if (t < 2 * dev.width + dev.height) {
                inst.x = 2 * dev.width + dev.height - t;
                inst.y = dev.height - 1;
            } else {
                inst.x = 0;
                inst.y = perim - t;
            }
            inst.x = std::clamp(inst.x, 0.0, dev.width - 1.0);
            inst.y = std::clamp(inst.y, 0.0, dev.height - 1.0);
        }
        for (size_t i = 0; i < clkbufs.size(); i++) {
            Instance& inst = nl.instances[clkbufs[i]];
            inst.fixed = true;
            inst.has_pos = true;
            inst.x = dev.width / 2.0;
            inst.y = dev.height * double(i + 1) / double(clkbufs.size() + 1);
        }
    }

    // Nets. Every driver gets fanout ~ 1 + Geometric(1/mean), loads drawn
    // without replacement from the downstream candidate pool.
    double p_geo = 1.0 / std::max(1.01, fanout_mean);
    std::geometric_distribution<int> geo(p_geo);
    std::vector<int> fanin_count(nl.instances.size(), 0);

    auto stage_of_level = [&](int lv) {
        for (int s = 0; s < n_stages; s++)
            if (lv < stage_end[s]) return s;
        return n_stages - 1;
    };

    auto add_net = [&](int driver, const std::vector<int>& pool, int want) {
        Net net;
        net.id = static_cast<int>(nl.nets.size());
        net.name = "n" + std::to_string(net.id);
        net.driver.inst = driver;
        want = std::min<int>(want, static_cast<int>(pool.size()));
        if (want <= 0) return -1;
        std::set<int> chosen;
        while (static_cast<int>(chosen.size()) < want)
            chosen.insert(pool[rng() % pool.size()]);
        for (int id : chosen) {
            net.loads.push_back({id, 0.0, 0.0});
            fanin_count[id]++;
        }
        nl.nets.push_back(std::move(net));
        return net.id;
    };

    auto downstream_pool = [&](int lv) {
        // Candidates: comb instances in the next few levels of the same
        // stage, plus the stage's sequential rank when near its end.
        std::vector<int> pool;
        int s = stage_of_level(lv);
        for (int l2 = lv + 1; l2 < std::min(stage_end[s], lv + 4); l2++)
            pool.insert(pool.end(), levels[l2].begin(), levels[l2].end());
        if (lv + 2 >= stage_end[s] && !ranks[s].empty())
            pool.insert(pool.end(), ranks[s].begin(), ranks[s].end());
        if (pool.empty() && !ranks[s].empty()) pool = ranks[s];
        if (pool.empty() && s == n_stages - 1) pool = io_out;
        return pool;
    };

    // Input IOs drive the first levels.
    {
        std::vector<int> pool;
        for (int l = 0; l < std::min(2, n_levels); l++)
            pool.insert(pool.end(), levels[l].begin(), levels[l].end());
        if (pool.empty() && !ranks[0].empty()) pool = ranks[0];
        for (int io : io_in) add_net(io, pool, 1 + geo(rng));
    }
    // Comb instances.
    for (int lv = 0; lv < n_levels; lv++)
        for (int id : levels[lv]) add_net(id, downstream_pool(lv), 1 + geo(rng));
    // Sequential ranks drive the next stage (or the output IOs).
    for (int s = 0; s < n_stages; s++) {
        std::vector<int> pool;
        if (s + 1 < n_stages) {
            for (int l2 = stage_end[s]; l2 < std::min(stage_end[s] + 3, stage_end[s + 1]); l2++)
                pool.insert(pool.end(), levels[l2].begin(), levels[l2].end());
            if (pool.empty()) pool = ranks[s + 1];
        } else {
            pool = io_out;
        }
        for (int id : ranks[s]) add_net(id, pool, 1 + geo(rng));
    }

    // Orphan repair: every comb/seq/output instance needs at least one fanin.
    // Attach orphans as extra loads on an existing net from upstream.
    {
        std::vector<int> net_of_driver(nl.instances.size(), -1);
        for (const Net& net : nl.nets) net_of_driver[net.driver.inst] = net.id;
        auto attach = [&](int id, const std::vector<int>& driver_pool) {
            // a bounded number of retries; some pool members may drive nothing
            for (int tries = 0; tries < 8 && !driver_pool.empty(); tries++) {
                int d = driver_pool[rng() % driver_pool.size()];
                if (net_of_driver[d] < 0) continue;
                nl.nets[net_of_driver[d]].loads.push_back({id, 0.0, 0.0});
                fanin_count[id]++;
                return;
            }
        };
        for (int lv = 0; lv < n_levels; lv++) {
            const std::vector<int>& up = lv == 0 ? io_in : levels[lv - 1];
            for (int id : levels[lv])
                if (fanin_count[id] == 0) attach(id, up);
        }
        for (int s = 0; s < n_stages; s++) {
            const std::vector<int>& up = stage_end[s] > 0 && !levels.empty()
                                             ? levels[std::min(stage_end[s], n_levels) - 1]
                                             : io_in;
            for (int id : ranks[s])
                if (fanin_count[id] == 0) attach(id, up);
        }
        for (int id : io_out)
            if (fanin_count[id] == 0 && !ranks.empty()) attach(id, ranks[n_stages - 1]);
    }

    // Capacity check against the device actually used.
    std::array<long long, kNumInstanceKinds> counts{};
    for (const Instance& inst : nl.instances) counts[static_cast<int>(inst.kind)]++;
    for (auto& [kind, cap] : dev.capacity)
        if (double(counts[static_cast<int>(kind)]) > double(dev.width) * dev.height * cap)
            throw ValidationError(std::string("synth: cells exceed device capacity for ") +
                                  kind_name(kind));

    res.oracle.seed = seed;
    return res;
}

// Uniform random placement of the movables; fixed instances keep their spots.
inline PlacementState random_placement(const Netlist& nl, const Device& dev, uint64_t seed) {
    PlacementState pl;
    pl.resize(nl.instances.size());
    Rng rng(split_seed(seed, 0x91acee));
    std::uniform_real_distribution<double> ux(0.0, dev.width - 1e-9);
    std::uniform_real_distribution<double> uy(0.0, dev.height - 1e-9);
    for (const Instance& inst : nl.instances) {
        if (inst.has_pos) {
            pl.x[inst.id] = inst.x;
            pl.y[inst.id] = inst.y;
        } else {
            pl.x[inst.id] = ux(rng);
            pl.y[inst.id] = uy(rng);
        }
    }
    return pl;
}

}  // namespace tdp

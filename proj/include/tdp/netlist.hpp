#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tdp/common.hpp"

namespace tdp {

using json = nlohmann::json;

enum class InstanceKind : int {
    LUT = 0,
    FF,
    DSP,
    RAMB,
    MUX,
    IO,
    ClockBuffer,
    CARRY8,
    Shifter,
    LUTRAM,
    kNumKinds
};

constexpr int kNumInstanceKinds = static_cast<int>(InstanceKind::kNumKinds);

inline const char* kind_name(InstanceKind k) {
    switch (k) {
        case InstanceKind::LUT: return "LUT";
        case InstanceKind::FF: return "FF";
        case InstanceKind::DSP: return "DSP";
        case InstanceKind::RAMB: return "RAMB";
        case InstanceKind::MUX: return "MUX";
        case InstanceKind::IO: return "IO";
        case InstanceKind::ClockBuffer: return "ClockBuffer";
        case InstanceKind::CARRY8: return "CARRY8";
        case InstanceKind::Shifter: return "Shifter";
        case InstanceKind::LUTRAM: return "LUTRAM";
        default: return "?";
    }
}

inline std::optional<InstanceKind> kind_from_name(const std::string& s) {
    for (int i = 0; i < kNumInstanceKinds; i++) {
        InstanceKind k = static_cast<InstanceKind>(i);
        if (s == kind_name(k)) return k;
    }
    return std::nullopt;
}

// Registers and hard blocks with internal state act as timing start/end
// points; everything else is swept through by the timing DAG.
inline bool default_sequential(InstanceKind k) {
    return k == InstanceKind::FF || k == InstanceKind::RAMB ||
           k == InstanceKind::DSP || k == InstanceKind::IO;
}

struct Instance {
    int id = -1;
    std::string name;
    InstanceKind kind = InstanceKind::LUT;
    bool fixed = false;
    bool sequential = false;
    int clock = -1;       // index into Netlist::clocks, -1 if unclocked
    bool has_pos = false; // coordinates present in the source file
    double x = 0.0, y = 0.0;
};

// A pin is (owning instance, offset from the instance origin). Offsets
// default to (0,0); the placement variables are instance-level.
struct PinRef {
    int inst = -1;
    double dx = 0.0, dy = 0.0;
};

struct Net {
    int id = -1;
    std::string name;
    PinRef driver;
    std::vector<PinRef> loads; // order is stable; defines the net-index feature
    int pin_count() const { return 1 + static_cast<int>(loads.size()); }
};

struct Netlist {
    std::vector<Instance> instances;
    std::vector<Net> nets;
    std::vector<std::string> clocks; // interned clock-domain labels
    std::unordered_map<std::string, int> inst_by_name;

    int inst_index(const std::string& name) const {
        auto it = inst_by_name.find(name);
        return it == inst_by_name.end() ? -1 : it->second;
    }
};

struct Device {
    int width = 0;
    int height = 0;
    int cr_rows = 1;
    int cr_cols = 1;
    std::map<InstanceKind, double> capacity; // per 1x1 site; absent kind = unconstrained
    int clock_capacity = 24;

    int clock_region_count() const { return cr_rows * cr_cols; }

    int clock_region_of(double x, double y) const {
        int rw = width / cr_cols, rh = height / cr_rows;
        int c = std::clamp(static_cast<int>(std::floor(x / rw)), 0, cr_cols - 1);
        int r = std::clamp(static_cast<int>(std::floor(y / rh)), 0, cr_rows - 1);
        return r * cr_cols + c;
    }

    struct Rect {
        double x0, y0, x1, y1;
    };

    Rect clock_region_bounds(int idx) const {
        int rw = width / cr_cols, rh = height / cr_rows;
        int r = idx / cr_cols, c = idx % cr_cols;
        return {double(c * rw), double(r * rh), double((c + 1) * rw), double((r + 1) * rh)};
    }
};

struct PlacementState {
    std::vector<double> x, y;

    size_t size() const { return x.size(); }
    void resize(size_t n) {
        x.assign(n, 0.0);
        y.assign(n, 0.0);
    }
    double pin_x(const PinRef& p) const { return x[p.inst] + p.dx; }
    double pin_y(const PinRef& p) const { return y[p.inst] + p.dy; }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline PinRef parse_pin(const json& j, const Netlist& nl, const std::string& net_name) {
    if (!j.is_object() || !j.contains("inst"))
        throw ValidationError("net " + net_name + ": pin must be an object with \"inst\"");
    PinRef p;
    std::string iname = j.at("inst").get<std::string>();
    p.inst = nl.inst_index(iname);
    if (p.inst < 0)
        throw ValidationError("net " + net_name + ": unknown instance \"" + iname + "\"");
    if (j.contains("offset")) {
        const json& off = j.at("offset");
        if (!off.is_array() || off.size() != 2)
            throw ValidationError("net " + net_name + ": offset must be [dx, dy]");
        p.dx = off[0].get<double>();
        p.dy = off[1].get<double>();
    }
    return p;
}

}  // namespace detail

inline Netlist parse_netlist(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("netlist: malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("instances") || !j.contains("nets"))
        throw ValidationError("netlist: expected {\"instances\": [...], \"nets\": [...]}");

    Netlist nl;
    std::unordered_map<std::string, int> clock_ids;
    for (const json& ji : j.at("instances")) {
        Instance inst;
        inst.id = static_cast<int>(nl.instances.size());
        inst.name = ji.at("name").get<std::string>();
        if (nl.inst_by_name.count(inst.name))
            throw ValidationError("netlist: duplicate instance \"" + inst.name + "\"");
        std::string ks = ji.at("kind").get<std::string>();
        auto k = kind_from_name(ks);
        if (!k) throw ValidationError("instance " + inst.name + ": unknown kind \"" + ks + "\"");
        inst.kind = *k;
        inst.sequential = default_sequential(inst.kind);
        inst.fixed = ji.value("fixed", false);
        if (ji.contains("x") != ji.contains("y"))
            throw ValidationError("instance " + inst.name + ": x and y must appear together");
        if (ji.contains("x")) {
            inst.has_pos = true;
            inst.x = ji.at("x").get<double>();
            inst.y = ji.at("y").get<double>();
        }
        if (ji.contains("clock")) {
            std::string c = ji.at("clock").get<std::string>();
            auto [it, fresh] = clock_ids.try_emplace(c, static_cast<int>(nl.clocks.size()));
            if (fresh) nl.clocks.push_back(c);
            inst.clock = it->second;
        }
        nl.inst_by_name[inst.name] = inst.id;
        nl.instances.push_back(std::move(inst));
    }

    std::unordered_map<std::string, int> net_names;
    for (const json& jn : j.at("nets")) {
        Net net;
        net.id = static_cast<int>(nl.nets.size());
        net.name = jn.at("name").get<std::string>();
        if (net_names.count(net.name))
            throw ValidationError("netlist: duplicate net \"" + net.name + "\"");
        net_names[net.name] = net.id;
        if (!jn.contains("driver"))
            throw ValidationError("net " + net.name + ": missing driver");
        const json& jd = jn.at("driver");
        if (jd.is_array()) {
            if (jd.empty()) throw ValidationError("net " + net.name + ": missing driver");
            if (jd.size() > 1) throw ValidationError("net " + net.name + ": multiple drivers");
            net.driver = detail::parse_pin(jd[0], nl, net.name);
        } else {
            net.driver = detail::parse_pin(jd, nl, net.name);
        }
        if (jn.contains("loads"))
            for (const json& jl : jn.at("loads"))
                net.loads.push_back(detail::parse_pin(jl, nl, net.name));
        nl.nets.push_back(std::move(net));
    }
    return nl;
}

inline Netlist parse_netlist_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open netlist file: " + path);
    return parse_netlist(f);
}

inline Device parse_device(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("device: malformed JSON: ") + e.what());
    }
    Device dev;
    dev.width = j.at("width").get<int>();
    dev.height = j.at("height").get<int>();
    if (dev.width <= 0 || dev.height <= 0)
        throw ValidationError("device: width and height must be positive");
    if (j.contains("clock_regions")) {
        dev.cr_rows = j.at("clock_regions").at("rows").get<int>();
        dev.cr_cols = j.at("clock_regions").at("cols").get<int>();
    }
    if (dev.cr_rows <= 0 || dev.cr_cols <= 0)
        throw ValidationError("device: clock region grid must be positive");
    // The region rectangles must tile the die exactly; anything else would
    // leave sites outside every region (or inside two).
    if (dev.width % dev.cr_cols != 0 || dev.height % dev.cr_rows != 0)
        throw ValidationError("device: clock regions do not tile the die exactly");
    if (j.contains("capacity")) {
        for (auto& [key, val] : j.at("capacity").items()) {
            auto k = kind_from_name(key);
            if (!k) throw ValidationError("device: unknown site type \"" + key + "\"");
            double cap = val.get<double>();
            if (cap < 0) throw ValidationError("device: negative capacity for " + key);
            dev.capacity[*k] = cap;
        }
    }
    dev.clock_capacity = j.value("clock_capacity", 24);
    if (dev.clock_capacity <= 0)
        throw ValidationError("device: clock_capacity must be positive");
    return dev;
}

inline Device parse_device_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open device file: " + path);
    return parse_device(f);
}

// ---------------------------------------------------------------------------
// Serialization. Output is canonical: sorted object keys (nlohmann default
// ordering), instances/nets in id order, zero offsets omitted. parse of the
// output followed by serialize reproduces the bytes.

inline json pin_to_json(const Netlist& nl, const PinRef& p) {
    json j;
    j["inst"] = nl.instances[p.inst].name;
    if (p.dx != 0.0 || p.dy != 0.0) j["offset"] = {p.dx, p.dy};
    return j;
}

inline std::string serialize_netlist(const Netlist& nl) {
    json j;
    j["instances"] = json::array();
    for (const Instance& inst : nl.instances) {
        json ji;
        ji["name"] = inst.name;
        ji["kind"] = kind_name(inst.kind);
        ji["fixed"] = inst.fixed;
        if (inst.has_pos) {
            ji["x"] = inst.x;
            ji["y"] = inst.y;
        }
        if (inst.clock >= 0) ji["clock"] = nl.clocks[inst.clock];
        j["instances"].push_back(std::move(ji));
    }
    j["nets"] = json::array();
    for (const Net& net : nl.nets) {
        json jn;
        jn["name"] = net.name;
        jn["driver"] = pin_to_json(nl, net.driver);
        jn["loads"] = json::array();
        for (const PinRef& p : net.loads) jn["loads"].push_back(pin_to_json(nl, p));
        j["nets"].push_back(std::move(jn));
    }
    return j.dump(2) + "\n";
}

inline std::string serialize_device(const Device& dev) {
    json j;
    j["width"] = dev.width;
    j["height"] = dev.height;
    j["clock_regions"] = {{"rows", dev.cr_rows}, {"cols", dev.cr_cols}};
    json caps = json::object();
    for (auto& [k, v] : dev.capacity) caps[kind_name(k)] = v;
    j["capacity"] = std::move(caps);
    j["clock_capacity"] = dev.clock_capacity;
    return j.dump(2) + "\n";
}

inline std::string serialize_placement(const Netlist& nl, const PlacementState& pl) {
    json arr = json::array();
    for (const Instance& inst : nl.instances) {
        json ji;
        ji["inst"] = inst.name;
        ji["x"] = pl.x[inst.id];
        ji["y"] = pl.y[inst.id];
        arr.push_back(std::move(ji));
    }
    json j;
    j["placements"] = std::move(arr);
    return j.dump(2) + "\n";
}

inline void load_placement(std::istream& in, const Netlist& nl, PlacementState& pl) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("placement: malformed JSON: ") + e.what());
    }
    if (!j.contains("placements"))
        throw ValidationError("placement: expected {\"placements\": [...]}");
    for (const json& jp : j.at("placements")) {
        std::string name = jp.at("inst").get<std::string>();
        int id = nl.inst_index(name);
        if (id < 0) throw ValidationError("placement: unknown instance \"" + name + "\"");
        pl.x[id] = jp.at("x").get<double>();
        pl.y[id] = jp.at("y").get<double>();
    }
}

inline PlacementState load_placement_file(const std::string& path, const Netlist& nl) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open placement file: " + path);
    PlacementState pl;
    pl.resize(nl.instances.size());
    for (const Instance& inst : nl.instances)
        if (inst.has_pos) {
            pl.x[inst.id] = inst.x;
            pl.y[inst.id] = inst.y;
        }
    load_placement(f, nl, pl);
    return pl;
}

// Fixed instances keep their file coordinates; movables take file coordinates
// when present, otherwise a seeded jitter around the die center so symmetric
// nets do not start perfectly degenerate.
inline PlacementState initial_placement(const Netlist& nl, const Device& dev, uint64_t seed) {
    PlacementState pl;
    pl.resize(nl.instances.size());
    Rng rng(split_seed(seed, 0x9ace));
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    double cx = dev.width * 0.5, cy = dev.height * 0.5;
    double span = 0.05 * std::min(dev.width, dev.height);
    for (const Instance& inst : nl.instances) {
        if (inst.has_pos) {
            pl.x[inst.id] = inst.x;
            pl.y[inst.id] = inst.y;
        } else {
            pl.x[inst.id] = cx + span * jitter(rng);
            pl.y[inst.id] = cy + span * jitter(rng);
        }
    }
    return pl;
}

// ---------------------------------------------------------------------------
// Wirelength

inline double net_hpwl_x(const Net& net, const PlacementState& pl) {
    double lo = pl.pin_x(net.driver), hi = lo;
    for (const PinRef& p : net.loads) {
        double v = pl.pin_x(p);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

inline double net_hpwl_y(const Net& net, const PlacementState& pl) {
    double lo = pl.pin_y(net.driver), hi = lo;
    for (const PinRef& p : net.loads) {
        double v = pl.pin_y(p);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

inline double net_hpwl(const Net& net, const PlacementState& pl) {
    return net_hpwl_x(net, pl) + net_hpwl_y(net, pl);
}

inline double total_hpwl(const Netlist& nl, const PlacementState& pl) {
    double sum = 0.0;
    for (const Net& net : nl.nets) sum += net_hpwl(net, pl);
    return sum;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
    std::string code;
    std::string message;
};

inline std::vector<Violation> validate(const Netlist& nl, const Device& dev) {
    std::vector<Violation> out;

    std::array<long long, kNumInstanceKinds> counts{};
    for (const Instance& inst : nl.instances) {
        counts[static_cast<int>(inst.kind)]++;
        if (inst.fixed && !inst.has_pos)
            out.push_back({"unplaced-fixed",
                           "fixed instance \"" + inst.name + "\" has no coordinates"});
    }
    double sites = double(dev.width) * double(dev.height);
    for (auto& [kind, cap] : dev.capacity) {
        long long have = counts[static_cast<int>(kind)];
        double total = sites * cap;
        if (double(have) > total) {
            std::ostringstream os;
            os << "insufficient " << kind_name(kind) << " capacity: " << have
               << " instances vs " << total << " sites";
            out.push_back({"capacity", os.str()});
        }
    }

    // Combinational cycles: DFS over arcs between non-sequential instances.
    // Sequential instances cut paths (their arrival side and departure side
    // are distinct timing vertices), so they are simply not expanded.
    int n = static_cast<int>(nl.instances.size());
    std::vector<std::vector<int>> comb_out(n);
    for (const Net& net : nl.nets) {
        const Instance& d = nl.instances[net.driver.inst];
        if (d.sequential) continue;
        for (const PinRef& p : net.loads)
            if (!nl.instances[p.inst].sequential)
                comb_out[net.driver.inst].push_back(p.inst);
    }
    std::vector<int> color(n, 0); // 0 white, 1 on stack, 2 done
    std::vector<std::pair<int, size_t>> stack;
    for (int s = 0; s < n; s++) {
        if (color[s] != 0 || nl.instances[s].sequential) continue;
        stack.push_back({s, 0});
        color[s] = 1;
        while (!stack.empty()) {
            auto& [v, idx] = stack.back();
            if (idx < comb_out[v].size()) {
                int w = comb_out[v][idx++];
                if (color[w] == 1) {
                    out.push_back({"comb-cycle", "combinational cycle through \"" +
                                                     nl.instances[w].name + "\""});
                    color[w] = 2; // report once per cycle entry point
                } else if (color[w] == 0) {
                    color[w] = 1;
                    stack.push_back({w, 0});
                }
            } else {
                color[v] = 2;
                stack.pop_back();
            }
        }
    }
    return out;
}

}  // namespace tdp

#pragma once

// Shared fixtures for the test suite: string parsers, a scratch directory,
// and a tiny programmatic netlist builder used where JSON would be noise.

#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include "tdp/netlist.hpp"

namespace tt {

inline tdp::Netlist nl_from_json(const std::string& text) {
    std::istringstream in(text);
    return tdp::parse_netlist(in);
}

inline tdp::Device dev_from_json(const std::string& text) {
    std::istringstream in(text);
    return tdp::parse_device(in);
}

inline tdp::Device small_device() {
    return tdp::parse_device_file(std::string(TDP_DATA_DIR) + "/device_small.json");
}

// Scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("tdp_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// Programmatic builder: add instances and nets without JSON round trips.
struct Builder {
    tdp::Netlist nl;

    int inst(const std::string& name, tdp::InstanceKind kind, bool fixed = false,
             double x = 0.0, double y = 0.0, bool has_pos = false, int clock = -1) {
        tdp::Instance i;
        i.id = static_cast<int>(nl.instances.size());
        i.name = name;
        i.kind = kind;
        i.sequential = tdp::default_sequential(kind);
        i.fixed = fixed;
        i.has_pos = has_pos || fixed;
        i.x = x;
        i.y = y;
        i.clock = clock;
        nl.inst_by_name[name] = i.id;
        nl.instances.push_back(i);
        return i.id;
    }

    int net(const std::string& name, int driver, std::vector<int> loads) {
        tdp::Net n;
        n.id = static_cast<int>(nl.nets.size());
        n.name = name;
        n.driver = {driver, 0.0, 0.0};
        for (int l : loads) n.loads.push_back({l, 0.0, 0.0});
        nl.nets.push_back(std::move(n));
        return nl.nets.back().id;
    }
};

} // namespace tt

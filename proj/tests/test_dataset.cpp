#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "helpers.hpp"
#include "tdp/dataset.hpp"

using namespace tdp;

namespace {

Dataset sample_dataset(int cells, uint64_t seed) {
    SynthResult sr = synth_design(cells, seed);
    PlacementState pl = random_placement(sr.netlist, sr.device, seed + 1);
    return extract_dataset(sr.netlist, pl, sr.device, sr.oracle, 4, seed + 2);
}

} // namespace

TEST_CASE("extraction labels follow the oracle", "[dataset]") {
    SynthResult sr = synth_design(150, 3);
    PlacementState pl = random_placement(sr.netlist, sr.device, 4);
    Dataset ds = extract_dataset(sr.netlist, pl, sr.device, sr.oracle, 4, 5);

    size_t live = 0;
    for (const Net& n : sr.netlist.nets)
        if (!n.loads.empty()) live++;
    REQUIRE(ds.groups.size() == live);
    CHECK(ds.pair_count() > ds.groups.size() / 2);

    // same seed same labels, different seed different noise
    Dataset again = extract_dataset(sr.netlist, pl, sr.device, sr.oracle, 4, 5);
    Dataset other = extract_dataset(sr.netlist, pl, sr.device, sr.oracle, 4, 6);
    bool any_diff = false;
    for (size_t i = 0; i < ds.groups.size(); i++)
        for (size_t k = 0; k < ds.groups[i].labels.size(); k++) {
            CHECK(again.groups[i].labels[k] == ds.groups[i].labels[k]);
            any_diff |= other.groups[i].labels[k] != ds.groups[i].labels[k];
        }
    CHECK(any_diff);

    // labels respect the oracle floor and hover near its mean curve
    for (const SampleGroup& g : ds.groups) {
        const Net& net = sr.netlist.nets[g.nf.net];
        for (size_t k = 0; k < g.labels.size(); k++) {
            CHECK(g.labels[k] >= sr.oracle.delay_floor);
            InstanceKind lk = sr.netlist.instances[net.loads[k].inst].kind;
            double mean = sr.oracle.mean_delay(g.nf.pins[k][0] + g.nf.pins[k][1], g.nf.env[3],
                                               g.nf.env[4], g.nf.pins[k][6], lk);
            CHECK(std::abs(g.labels[k] - mean) < 8.0 * sr.oracle.noise_sigma + 1e-9);
        }
    }

    Netlist empty;
    PlacementState ep;
    REQUIRE_THROWS_AS(extract_dataset(empty, ep, sr.device, sr.oracle, 4, 1), ValidationError);
}

TEST_CASE("split is 70/15/15 by net and loses nothing", "[dataset]") {
    Dataset ds = sample_dataset(400, 11);
    size_t n = ds.groups.size();
    std::multiset<std::string> before;
    for (const SampleGroup& g : ds.groups) before.insert(g.net_name);

    DatasetSplit sp = split_dataset(std::move(ds), 19);
    CHECK(sp.train.groups.size() == (70 * n) / 100);
    CHECK(sp.val.groups.size() == (15 * n) / 100);
    CHECK(sp.train.groups.size() + sp.val.groups.size() + sp.test.groups.size() == n);

    // every net appears exactly once across the three partitions
    std::multiset<std::string> after;
    std::set<std::string> train_names, other_names;
    for (const SampleGroup& g : sp.train.groups) {
        after.insert(g.net_name);
        train_names.insert(g.net_name);
    }
    for (const SampleGroup& g : sp.val.groups) {
        after.insert(g.net_name);
        other_names.insert(g.net_name);
    }
    for (const SampleGroup& g : sp.test.groups) {
        after.insert(g.net_name);
        other_names.insert(g.net_name);
    }
    CHECK(after == before);
    for (const std::string& name : other_names) CHECK_FALSE(train_names.count(name));
}

TEST_CASE("split shuffles by seed deterministically", "[dataset]") {
    Dataset a = sample_dataset(200, 23);
    Dataset b = sample_dataset(200, 23);
    DatasetSplit sa = split_dataset(std::move(a), 7);
    DatasetSplit sb = split_dataset(std::move(b), 7);
    REQUIRE(sa.train.groups.size() == sb.train.groups.size());
    for (size_t i = 0; i < sa.train.groups.size(); i++)
        CHECK(sa.train.groups[i].net_name == sb.train.groups[i].net_name);

    Dataset c = sample_dataset(200, 23);
    DatasetSplit sc = split_dataset(std::move(c), 8);
    bool differs = false;
    for (size_t i = 0; i < sa.train.groups.size(); i++)
        differs |= sa.train.groups[i].net_name != sc.train.groups[i].net_name;
    CHECK(differs);
}

TEST_CASE("jsonl round trip preserves groups, features and labels", "[dataset]") {
    Dataset ds = sample_dataset(150, 31);
    std::ostringstream out;
    write_dataset(out, ds);

    // one line per pair
    size_t lines = 0;
    for (char ch : out.str())
        if (ch == '\n') lines++;
    CHECK(lines == ds.pair_count());

    std::istringstream in(out.str());
    Dataset back = read_dataset(in);
    REQUIRE(back.groups.size() == ds.groups.size());
    for (size_t i = 0; i < ds.groups.size(); i++) {
        const SampleGroup& a = ds.groups[i];
        const SampleGroup& b = back.groups[i];
        CHECK(b.net_name == a.net_name);
        CHECK(b.nf.net == static_cast<int>(i)); // reindexed densely on load
        REQUIRE(b.labels.size() == a.labels.size());
        for (size_t k = 0; k < a.labels.size(); k++) {
            CHECK(b.labels[k] == a.labels[k]);
            for (int c = 0; c < kPinFeatureDim; c++) CHECK(b.nf.pins[k][c] == a.nf.pins[k][c]);
        }
        for (int c = 0; c < kEnvFeatureDim; c++) CHECK(b.nf.env[c] == a.nf.env[c]);
        REQUIRE(b.nf.graph.vx.rows() == a.nf.graph.vx.rows());
        CHECK(b.nf.graph.vx == a.nf.graph.vx);
        REQUIRE(b.nf.graph.edges.size() == a.nf.graph.edges.size());
        for (size_t e = 0; e < a.nf.graph.edges.size(); e++) {
            CHECK(b.nf.graph.edges[e].src == a.nf.graph.edges[e].src);
            CHECK(b.nf.graph.edges[e].dst == a.nf.graph.edges[e].dst);
            CHECK(b.nf.graph.edges[e].type == a.nf.graph.edges[e].type);
        }
    }
}

TEST_CASE("dataset reader rejects junk", "[dataset]") {
    auto bad = [](const std::string& s) {
        std::istringstream in(s);
        REQUIRE_THROWS_AS(read_dataset(in), ValidationError);
    };
    bad("");
    bad("not json\n");
    bad(R"({"net":"n0","vertices":[[1,2]],"edges":[],"env":[0,0,0,0,0],)"
        R"("pin":[0,0,0,0,0,0,0],"delay":0.1})"
        "\n"); // vertex row too narrow
}

TEST_CASE("file io round trip", "[dataset]") {
    Dataset ds = sample_dataset(100, 41);
    tt::TempDir td("dataset");
    write_dataset_file(td.file("d.jsonl"), ds);
    Dataset back = read_dataset_file(td.file("d.jsonl"));
    CHECK(back.pair_count() == ds.pair_count());
    REQUIRE_THROWS_AS(read_dataset_file(td.file("missing.jsonl")), ValidationError);
}

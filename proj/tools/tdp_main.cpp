// tdp: timing-driven analytical global placement for FPGA netlists.
// Subcommands: synth, place, sta, extract, train, report.
// Exit codes: 0 ok, 1 usage, 2 validation failure, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tdp/dataset.hpp"
#include "tdp/oracle_model.hpp"
#include "tdp/placer.hpp"
#include "tdp/report.hpp"
#include "tdp/synth.hpp"
#include "tdp/train.hpp"

namespace {

struct GlobalOpts {
    uint64_t seed = 1;
    int threads = 1;
    std::string config_path;
    tdp::json config; // parsed lazily; null when absent
};

void require_known_keys(const tdp::json& j, std::initializer_list<const char*> known,
                        const std::string& section) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok)
            throw tdp::ValidationError("config: unknown key \"" + it.key() + "\" in " + section);
    }
}

void apply_placer_config(const tdp::json& j, tdp::PlacerConfig& cfg) {
    require_known_keys(j,
                       {"lambda", "lambda_warmup", "alpha", "beta", "gamma", "percentile",
                        "clock_period", "max_iterations", "min_iterations", "anchor_base",
                        "anchor_growth", "clock_pseudo_base", "long_path_arcs", "region_majority",
                        "b_min", "b_max", "eps", "cg_tolerance", "cg_max_iters", "batch_size",
                        "cell_size", "bin_size", "hpwl_stop", "hpwl_stop_iters", "kappa",
                        "clock_util", "cap_coef"},
                       "placer");
    auto num = [&](const char* k, auto& field) {
        if (j.contains(k)) field = j.at(k).get<std::decay_t<decltype(field)>>();
    };
    num("lambda", cfg.lambda);
    num("lambda_warmup", cfg.lambda_warmup);
    num("alpha", cfg.alpha);
    num("beta", cfg.beta);
    num("gamma", cfg.gamma);
    num("percentile", cfg.percentile);
    num("clock_period", cfg.clock_period);
    num("max_iterations", cfg.max_iterations);
    num("min_iterations", cfg.min_iterations);
    num("anchor_base", cfg.anchor_base);
    num("anchor_growth", cfg.anchor_growth);
    num("clock_pseudo_base", cfg.clock_pseudo_base);
    num("long_path_arcs", cfg.long_path_arcs);
    num("region_majority", cfg.region_majority);
    num("b_min", cfg.b_min);
    num("b_max", cfg.b_max);
    num("eps", cfg.eps);
    num("cg_tolerance", cfg.cg_tolerance);
    num("cg_max_iters", cfg.cg_max_iters);
    num("batch_size", cfg.batch_size);
    num("cell_size", cfg.cell_size);
    num("bin_size", cfg.bin_size);
    num("hpwl_stop", cfg.hpwl_stop);
    num("hpwl_stop_iters", cfg.hpwl_stop_iters);
    num("kappa", cfg.kappa);
    num("clock_util", cfg.clock_util);
    num("cap_coef", cfg.cap_coef);
}

void apply_model_config(const tdp::json& j, tdp::ModelConfig& cfg) {
    require_known_keys(j,
                       {"conv_layers", "hidden_dim", "reduced_dim", "res_blocks", "res_dim",
                        "delay_floor", "huber_delta", "use_topology"},
                       "model");
    if (j.contains("conv_layers")) cfg.conv_layers = j.at("conv_layers").get<int>();
    if (j.contains("hidden_dim")) cfg.hidden_dim = j.at("hidden_dim").get<int>();
    if (j.contains("reduced_dim")) cfg.reduced_dim = j.at("reduced_dim").get<int>();
    if (j.contains("res_blocks")) cfg.res_blocks = j.at("res_blocks").get<int>();
    if (j.contains("res_dim")) cfg.res_dim = j.at("res_dim").get<int>();
    if (j.contains("delay_floor")) cfg.delay_floor = j.at("delay_floor").get<double>();
    if (j.contains("huber_delta")) cfg.huber_delta = j.at("huber_delta").get<double>();
    if (j.contains("use_topology")) cfg.use_topology = j.at("use_topology").get<bool>();
}

void apply_train_config(const tdp::json& j, tdp::TrainConfig& cfg) {
    require_known_keys(j, {"max_epochs", "batch_size", "lr", "patience"}, "train");
    if (j.contains("max_epochs")) cfg.max_epochs = j.at("max_epochs").get<int>();
    if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<int>();
    if (j.contains("lr")) cfg.lr = j.at("lr").get<double>();
    if (j.contains("patience")) cfg.patience = j.at("patience").get<int>();
}

void apply_oracle_config(const tdp::json& j, tdp::SyntheticOracle& o) {
    require_known_keys(
        j, {"a0", "a_dist", "a_fanout", "a_ard", "a_apd", "noise_sigma", "delay_floor",
            "kind_scale"},
        "oracle");
    if (j.contains("a0")) o.a0 = j.at("a0").get<double>();
    if (j.contains("a_dist")) o.a_dist = j.at("a_dist").get<double>();
    if (j.contains("a_fanout")) o.a_fanout = j.at("a_fanout").get<double>();
    if (j.contains("a_ard")) o.a_ard = j.at("a_ard").get<double>();
    if (j.contains("a_apd")) o.a_apd = j.at("a_apd").get<double>();
    if (j.contains("noise_sigma")) o.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("delay_floor")) o.delay_floor = j.at("delay_floor").get<double>();
    if (j.contains("kind_scale")) o.kind_scale = j.at("kind_scale").get<double>();
}

const tdp::json* config_section(const GlobalOpts& g, const char* name) {
    if (g.config.is_null()) return nullptr;
    if (!g.config.contains(name)) return nullptr;
    return &g.config.at(name);
}

void load_config(GlobalOpts& g) {
    if (g.config_path.empty()) return;
    std::ifstream f(g.config_path);
    if (!f) throw tdp::ValidationError("cannot open config file: " + g.config_path);
    try {
        f >> g.config;
    } catch (const tdp::json::exception& e) {
        throw tdp::ValidationError(std::string("config: malformed JSON: ") + e.what());
    }
    require_known_keys(g.config, {"placer", "model", "train", "oracle"}, "config");
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw tdp::ValidationError("cannot write file: " + path);
    f << text;
}

tdp::Netlist load_and_validate(const std::string& netlist_path, const std::string& device_path,
                               tdp::Device& dev_out) {
    tdp::Netlist nl = tdp::parse_netlist_file(netlist_path);
    dev_out = tdp::parse_device_file(device_path);
    std::vector<tdp::Violation> vs = tdp::validate(nl, dev_out);
    if (!vs.empty()) {
        for (const tdp::Violation& v : vs) std::cerr << v.code << ": " << v.message << "\n";
        throw tdp::ValidationError("netlist failed validation (" + std::to_string(vs.size()) +
                                   " problem(s))");
    }
    return nl;
}

std::unique_ptr<tdp::DelayPredictor> make_predictor(const std::string& model_path,
                                                    const std::string& oracle_path,
                                                    const tdp::Netlist& nl) {
    if (!model_path.empty())
        return std::make_unique<tdp::GraphDelayModel>(tdp::load_weights_file(model_path));
    if (!oracle_path.empty())
        return std::make_unique<tdp::OraclePredictor>(tdp::load_oracle_file(oracle_path), nl);
    return nullptr;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"timing-driven analytical global placement"};
    app.require_subcommand(1);
    GlobalOpts g;
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads for feature extraction")
        ->capture_default_str();
    app.add_option("--config", g.config_path, "JSON config with placer/model/train/oracle keys");

    // -------------------------------------------------------------- synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark with ground truth");
    int sy_cells = 1000;
    double sy_fanout = 3.0;
    std::string sy_netlist = "netlist.json", sy_device = "device.json",
                sy_oracle = "oracle.json", sy_use_device;
    synth->add_option("--cells", sy_cells, "approximate instance count")->capture_default_str();
    synth->add_option("--fanout-mean", sy_fanout, "target mean net fanout")
        ->capture_default_str();
    synth->add_option("--device", sy_use_device, "place onto this device instead of sizing one");
    synth->add_option("--out-netlist", sy_netlist, "output netlist path")->capture_default_str();
    synth->add_option("--out-device", sy_device, "output device path")->capture_default_str();
    synth->add_option("--out-oracle", sy_oracle, "output oracle path")->capture_default_str();
    synth->callback([&] {
        load_config(g);
        std::optional<tdp::Device> user_dev;
        if (!sy_use_device.empty()) user_dev = tdp::parse_device_file(sy_use_device);
        tdp::SynthResult res =
            tdp::synth_design(sy_cells, g.seed, user_dev ? &*user_dev : nullptr, sy_fanout);
        if (const tdp::json* oc = config_section(g, "oracle")) apply_oracle_config(*oc, res.oracle);
        std::vector<tdp::Violation> vs = tdp::validate(res.netlist, res.device);
        if (!vs.empty())
            throw tdp::NumericError("synth produced an invalid design: " + vs.front().message);
        write_text_file(sy_netlist, tdp::serialize_netlist(res.netlist));
        write_text_file(sy_device, tdp::serialize_device(res.device));
        write_text_file(sy_oracle, tdp::serialize_oracle(res.oracle));
        std::cout << "synth: " << res.netlist.instances.size() << " instances, "
                  << res.netlist.nets.size() << " nets, device " << res.device.width << "x"
                  << res.device.height << "\n";
    });

    // -------------------------------------------------------------- place
    auto* place = app.add_subcommand("place", "run global placement");
    std::string pl_netlist, pl_device, pl_model, pl_oracle, pl_out = "placement.json", pl_trace;
    tdp::PlacerConfig pcfg;
    place->add_option("--netlist", pl_netlist, "netlist JSON")->required();
    place->add_option("--device", pl_device, "device JSON")->required();
    place->add_option("--model", pl_model, "trained delay model weights");
    place->add_option("--oracle", pl_oracle, "synthetic oracle as the delay model")
        ->excludes("--model");
    place->add_option("--lambda", pcfg.lambda, "timing objective share")->capture_default_str();
    place->add_option("--alpha", pcfg.alpha, "weight exponent offset")->capture_default_str();
    place->add_option("--beta", pcfg.beta, "weight exponent slope")->capture_default_str();
    place->add_option("--gamma", pcfg.gamma, "critical path bonus")->capture_default_str();
    place->add_option("--percentile", pcfg.percentile, "slack percentile for the threshold")
        ->capture_default_str();
    place->add_option("--clock-period", pcfg.clock_period, "target clock period (ns)")
        ->capture_default_str();
    place->add_option("--iters", pcfg.max_iterations, "max placement iterations")
        ->capture_default_str();
    place->add_option("--out", pl_out, "output placement JSON")->capture_default_str();
    place->add_option("--trace", pl_trace, "per-iteration trace CSV");
    place->callback([&] {
        load_config(g);
        if (const tdp::json* pc = config_section(g, "placer")) {
            // flags given on the command line win over the config file
            const tdp::PlacerConfig from_cli = pcfg;
            apply_placer_config(*pc, pcfg);
            if (place->get_option("--lambda")->count()) pcfg.lambda = from_cli.lambda;
            if (place->get_option("--alpha")->count()) pcfg.alpha = from_cli.alpha;
            if (place->get_option("--beta")->count()) pcfg.beta = from_cli.beta;
            if (place->get_option("--gamma")->count()) pcfg.gamma = from_cli.gamma;
            if (place->get_option("--percentile")->count()) pcfg.percentile = from_cli.percentile;
            if (place->get_option("--clock-period")->count())
                pcfg.clock_period = from_cli.clock_period;
            if (place->get_option("--iters")->count())
                pcfg.max_iterations = from_cli.max_iterations;
        }
        pcfg.seed = g.seed;
        pcfg.threads = g.threads;
        tdp::Device dev;
        tdp::Netlist nl = load_and_validate(pl_netlist, pl_device, dev);
        std::unique_ptr<tdp::DelayPredictor> model = make_predictor(pl_model, pl_oracle, nl);
        tdp::GlobalPlaceResult res = tdp::global_place(nl, dev, pcfg, model.get());
        write_text_file(pl_out, tdp::serialize_placement(nl, res.placement));
        if (!pl_trace.empty()) tdp::write_trace_csv_file(pl_trace, res.trace);
        std::cout << "place: " << res.trace.size() << " iterations, hpwl " << res.hpwl;
        if (res.timed)
            std::cout << ", wns " << res.wns << ", tns " << res.tns << ", cpd " << res.cpd;
        std::cout << (res.cg_converged ? "" : " (cg hit iteration cap)") << "\n";
    });

    // -------------------------------------------------------------- sta
    auto* sta = app.add_subcommand("sta", "static timing analysis of a placement");
    std::string st_netlist, st_device, st_placement, st_model, st_oracle,
        st_out = "timing.json";
    double st_clock = 1.0;
    int st_cell = 4, st_batch = 256;
    sta->add_option("--netlist", st_netlist, "netlist JSON")->required();
    sta->add_option("--device", st_device, "device JSON")->required();
    sta->add_option("--placement", st_placement, "placement JSON")->required();
    sta->add_option("--model", st_model, "trained delay model weights");
    sta->add_option("--oracle", st_oracle, "synthetic oracle as the delay model")
        ->excludes("--model");
    sta->add_option("--clock-period", st_clock, "target clock period (ns)")->capture_default_str();
    sta->add_option("--cell-size", st_cell, "g-cell size in sites")->capture_default_str();
    sta->add_option("--batch", st_batch, "inference batch size in pin pairs")
        ->capture_default_str();
    sta->add_option("--out", st_out, "timing report JSON")->capture_default_str();
    sta->callback([&] {
        load_config(g);
        tdp::Device dev;
        tdp::Netlist nl = load_and_validate(st_netlist, st_device, dev);
        std::unique_ptr<tdp::DelayPredictor> model = make_predictor(st_model, st_oracle, nl);
        if (!model)
            throw tdp::ValidationError("sta: pass --model weights or --oracle ground truth");
        tdp::PlacementState pl = tdp::load_placement_file(st_placement, nl);
        tdp::TimingGraph tg =
            tdp::build_timing_graph(nl, tdp::LogicDelayTable::defaults(), st_clock);
        tdp::levelize(tg);
        tdp::GCellGrid grid = tdp::compute_routing_density(nl, pl, dev, st_cell);
        tdp::StaResult res =
            tdp::run_sta(tg, nl, pl, dev, grid, *model, st_batch, st_cell, g.threads);
        write_text_file(st_out, tdp::timing_report_json(tg, nl, res.path).dump(2) + "\n");
        std::cout << "sta: wns " << tg.wns << ", tns " << tg.tns << ", cpd " << tg.cpd
                  << ", critical path arcs " << res.path.c_max() << "\n";
    });

    // -------------------------------------------------------------- extract
    auto* extract = app.add_subcommand("extract", "build a delay dataset from a placed design");
    std::string ex_netlist, ex_device, ex_placement, ex_oracle, ex_prefix = "dataset";
    int ex_cell = 4;
    bool ex_random = false;
    extract->add_option("--netlist", ex_netlist, "netlist JSON")->required();
    extract->add_option("--device", ex_device, "device JSON")->required();
    extract->add_option("--placement", ex_placement, "placement JSON");
    extract->add_flag("--random-placement", ex_random,
                      "use a seeded random placement instead of --placement");
    extract->add_option("--oracle", ex_oracle, "oracle JSON for labels")->required();
    extract->add_option("--cell-size", ex_cell, "g-cell size in sites")->capture_default_str();
    extract->add_option("--out", ex_prefix, "output prefix for .train/.val/.test.jsonl")
        ->capture_default_str();
    extract->callback([&] {
        load_config(g);
        tdp::Device dev;
        tdp::Netlist nl = load_and_validate(ex_netlist, ex_device, dev);
        if (ex_placement.empty() == !ex_random)
            throw tdp::ValidationError("extract: pass exactly one of --placement or "
                                       "--random-placement");
        tdp::PlacementState pl = ex_random ? tdp::random_placement(nl, dev, g.seed)
                                           : tdp::load_placement_file(ex_placement, nl);
        tdp::SyntheticOracle oracle = tdp::load_oracle_file(ex_oracle);
        if (const tdp::json* oc = config_section(g, "oracle")) apply_oracle_config(*oc, oracle);
        tdp::Dataset ds = tdp::extract_dataset(nl, pl, dev, oracle, ex_cell, g.seed, g.threads);
        tdp::DatasetSplit sp = tdp::split_dataset(std::move(ds), g.seed);
        tdp::write_dataset_file(ex_prefix + ".train.jsonl", sp.train);
        tdp::write_dataset_file(ex_prefix + ".val.jsonl", sp.val);
        tdp::write_dataset_file(ex_prefix + ".test.jsonl", sp.test);
        std::cout << "extract: " << sp.train.groups.size() << "/" << sp.val.groups.size() << "/"
                  << sp.test.groups.size() << " nets, " << sp.train.pair_count() << "/"
                  << sp.val.pair_count() << "/" << sp.test.pair_count() << " pairs\n";
    });

    // -------------------------------------------------------------- train
    auto* train = app.add_subcommand("train", "train the delay model");
    std::string tr_train, tr_val, tr_test, tr_out = "weights.json", tr_history;
    tdp::TrainConfig tcfg;
    tdp::ModelConfig mcfg;
    bool tr_no_topology = false;
    train->add_option("--train", tr_train, "training JSONL")->required();
    train->add_option("--val", tr_val, "validation JSONL")->required();
    train->add_option("--test", tr_test, "test JSONL (evaluated after training)");
    train->add_option("--epochs", tcfg.max_epochs, "epoch cap")->capture_default_str();
    train->add_option("--batch", tcfg.batch_size, "batch size in pin pairs")
        ->capture_default_str();
    train->add_option("--lr", tcfg.lr, "learning rate")->capture_default_str();
    train->add_option("--patience", tcfg.patience, "early-stop patience in epochs")
        ->capture_default_str();
    train->add_flag("--no-topology", tr_no_topology, "drop the net graph branch");
    train->add_option("--out", tr_out, "output weights JSON")->capture_default_str();
    train->add_option("--history", tr_history, "per-epoch loss CSV");
    train->callback([&] {
        load_config(g);
        if (const tdp::json* mc = config_section(g, "model")) apply_model_config(*mc, mcfg);
        if (const tdp::json* tc = config_section(g, "train")) apply_train_config(*tc, tcfg);
        if (tr_no_topology) mcfg.use_topology = false;
        tcfg.seed = g.seed;
        tdp::Dataset train_ds = tdp::read_dataset_file(tr_train);
        tdp::Dataset val_ds = tdp::read_dataset_file(tr_val);
        tdp::TrainResult res = tdp::train_model(train_ds, val_ds, mcfg, tcfg);
        tdp::save_weights_file(tr_out, res.weights);
        if (!tr_history.empty()) {
            std::ofstream f(tr_history);
            if (!f) throw tdp::ValidationError("cannot write history file: " + tr_history);
            f << "epoch,train_loss,val_mae\n";
            for (const tdp::EpochLog& e : res.history)
                f << e.epoch << ',' << e.train_loss << ',' << e.val_mae << '\n';
        }
        std::cout << "train: best epoch " << res.best_epoch << ", val mae " << res.best_val_mae
                  << "\n";
        if (!tr_test.empty()) {
            tdp::Dataset test_ds = tdp::read_dataset_file(tr_test);
            tdp::EvalResult ev = tdp::evaluate_model(res.weights, test_ds, tcfg.batch_size);
            tdp::LinearBaseline lb = tdp::fit_baseline(train_ds);
            tdp::EvalResult bl = tdp::evaluate_baseline(lb, test_ds);
            std::cout << "test: model mae " << ev.mae << " r2 " << ev.r2 << "; linear mae "
                      << bl.mae << " r2 " << bl.r2 << "\n";
        }
    });

    // -------------------------------------------------------------- report
    auto* report = app.add_subcommand("report", "summarize a placement run");
    std::string rp_trace, rp_timing, rp_svg = "report.svg";
    report->add_option("--trace", rp_trace, "trace CSV from place")->required();
    report->add_option("--timing", rp_timing, "timing JSON from sta");
    report->add_option("--svg", rp_svg, "output convergence plot")->capture_default_str();
    report->callback([&] {
        std::vector<tdp::TraceRow> rows = tdp::read_trace_csv_file(rp_trace);
        std::optional<tdp::json> timing;
        if (!rp_timing.empty()) {
            std::ifstream f(rp_timing);
            if (!f) throw tdp::ValidationError("cannot open timing file: " + rp_timing);
            tdp::json j;
            try {
                f >> j;
            } catch (const tdp::json::exception& e) {
                throw tdp::ValidationError(std::string("timing: malformed JSON: ") + e.what());
            }
            timing = std::move(j);
        }
        write_text_file(rp_svg, tdp::render_trace_svg(rows));
        std::cout << tdp::render_summary(rows, timing ? &*timing : nullptr);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const tdp::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const tdp::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

#pragma once

// Command-line front end. Kept in a header so the integration tests can
// drive every subcommand in-process.
//
// Exit codes: decide -> 0 NO, 1 YES (single instance; batches exit 0);
// sat -> 10 SATISFIABLE, 20 UNSATISFIABLE; every command -> 2 on error.

#include "cpi/analog_pipeline.hpp"
#include "cpi/calibration.hpp"
#include "cpi/config_io.hpp"
#include "cpi/dsp.hpp"
#include "cpi/exact_oracle.hpp"
#include "cpi/generate.hpp"
#include "cpi/instances.hpp"
#include "cpi/netlist.hpp"
#include "cpi/reductions.hpp"
#include "cpi/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace cpi::cli {

inline constexpr int kExitNo = 0;
inline constexpr int kExitYes = 1;
inline constexpr int kExitError = 2;
inline constexpr int kExitSat = 10;
inline constexpr int kExitUnsat = 20;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// What a run depends on, recorded next to its outputs.
struct RunRecord {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    double wall_time = 0.0;
};

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string oracle = "exact-dp";
    std::optional<std::string> filter;
    std::optional<double> f0;
    unsigned jobs = 1;
    std::string out_dir;
    bool strict = false;
};

class Session {
public:
    Session(GlobalOptions opts, std::string command_line, std::ostream& out, std::ostream& err)
        : opts_(std::move(opts)), command_line_(std::move(command_line)), out_(out), err_(err) {
        if (!opts_.config_path.empty()) cfg_ = parse_run_config(read_file(opts_.config_path));
        if (opts_.seed) cfg_.analog.seed = *opts_.seed;
        if (opts_.filter) cfg_.filter.kind = parse_filter_kind(*opts_.filter);
        if (opts_.f0) cfg_.filter.cutoff_f0 = *opts_.f0;
        cfg_.filter.validate();
        record_.command = command_line_;
        record_.config_hash = config_hash(cfg_);
        record_.seed = cfg_.analog.seed;
    }

    const RunConfig& config() const { return cfg_; }
    RunConfig& config() { return cfg_; }
    const GlobalOptions& options() const { return opts_; }
    std::ostream& out() { return out_; }
    std::ostream& err() { return err_; }

    /// Comment header naming command, config hash and seed.
    std::string provenance(const std::string& comment = "#") const {
        return comment + " command: " + command_line_ + "\n" + comment + " config_hash: " + record_.config_hash +
               "\n" + comment + " seed: " + std::to_string(record_.seed) + "\n";
    }

    /// Writes into --out when given; returns whether a file was written.
    bool emit(const std::string& name, const std::string& content) {
        if (opts_.out_dir.empty()) return false;
        std::filesystem::create_directories(opts_.out_dir);
        const auto path = (std::filesystem::path(opts_.out_dir) / name).string();
        std::ofstream f(path, std::ios::binary);
        if (!f) throw InvalidInput("cannot write '" + path + "'");
        f << content;
        record_.outputs.push_back(path);
        return true;
    }

    void finish(double wall_time) {
        if (opts_.out_dir.empty()) return;
        record_.wall_time = wall_time;
        std::ostringstream o;
        o << "command = " << record_.command << "\nconfig_hash = " << record_.config_hash
          << "\nseed = " << record_.seed << "\noutputs = ";
        for (std::size_t i = 0; i < record_.outputs.size(); ++i) o << (i ? ", " : "") << record_.outputs[i];
        o << "\nwall_time_s = " << wall_time << '\n';
        std::filesystem::create_directories(opts_.out_dir);
        std::ofstream f(std::filesystem::path(opts_.out_dir) / "run_record.txt", std::ios::binary);
        f << o.str();
    }

private:
    GlobalOptions opts_;
    std::string command_line_;
    std::ostream& out_;
    std::ostream& err_;
    RunConfig cfg_;
    RunRecord record_;
};

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results land by
/// index, so output order never depends on scheduling.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::string csv_trace(const SampledTrace& tr, const std::string& provenance) {
    std::ostringstream o;
    o.precision(17);
    o << provenance << "time_s,volts\n";
    for (std::size_t i = 0; i < tr.size(); ++i) o << tr.time(i) << ',' << tr.values[i] << '\n';
    return o.str();
}

struct DecideOptions {
    std::vector<std::string> instances;
    std::string file;
    std::string calibration;
    bool trace = false;
    bool spectrum = false;
};

struct DecisionRecord {
    std::string instance;
    Answer answer = Answer::No;
    double dc = 0.0;
    double cut = 0.0;
    double margin = 0.0;
    std::uint64_t seed = 0;
    std::optional<SampledTrace> trace;
};

inline int cmd_decide(Session& s, const DecideOptions& o) {
    std::vector<CpiInstance> insts;
    for (const auto& t : o.instances) insts.push_back(parse_instance(t));
    if (!o.file.empty())
        for (auto& i : parse_instance_file(read_file(o.file))) insts.push_back(std::move(i));
    if (insts.empty()) throw InvalidInput("decide: no instance given");

    const std::string& oracle = s.options().oracle;
    const bool analog = oracle == "analog" || oracle == "analog-ideal";
    if (!analog && oracle != "exact" && oracle != "exact-dp" && oracle != "exact-bf")
        throw InvalidInput("unknown oracle '" + oracle + "'");

    RunConfig rc = s.config();
    if (oracle == "analog-ideal") {
        const auto seed = rc.analog.seed;
        rc.analog = NonidealityConfig::ideal();
        rc.analog.seed = seed;
    }
    std::optional<Calibration> calib;
    if (!o.calibration.empty()) {
        calib = parse_calibration(read_file(o.calibration));
        if (!calib->threshold.separable) throw InvalidInput("calibration threshold is not separable");
        if (!calib->z_compensation.empty()) rc.analog.z_compensation = calib->z_compensation;
    }

    std::vector<DecisionRecord> recs(insts.size());
    parallel_for(insts.size(), s.options().jobs, [&](std::size_t i) {
        const auto& inst = insts[i];
        DecisionRecord& r = recs[i];
        r.instance = to_string(inst);
        if (!analog) {
            const bool yes = oracle == "exact-bf" ? decide_bruteforce(inst) : decide_exact(inst);
            r.answer = yes ? Answer::Yes : Answer::No;
            r.dc = inst.size() <= kBruteForceMaxN ? ideal_dc(inst) : (yes ? 1.0 : 0.0);
            r.cut = std::ldexp(1.0, -static_cast<int>(inst.size()) - 1);
            r.margin = std::abs(r.dc - r.cut);
            return;
        }
        NonidealityConfig cfg = rc.analog;
        cfg.seed = insts.size() == 1 ? rc.analog.seed : sub_seed(rc.analog.seed, Stream::Batch, i);
        r.seed = cfg.seed;
        const auto thr = calib ? calib->threshold : nominal_threshold(inst.size(), cfg, rc.filter);
        const auto run = run_pipeline(inst, cfg, rc.filter, rc.plan);
        if (run.bandwidth_warning && s.options().strict)
            throw SimulationError("instance (" + r.instance + ") exceeds the multiplier bandwidth");
        const auto d = decide_from_dc(run.dc, thr);
        r.answer = d.answer;
        r.dc = d.dc_measured;
        r.cut = thr.cut;
        r.margin = d.margin;
        if (o.trace || o.spectrum) r.trace = run.trace;
    });

    std::ostringstream text;
    text.precision(12);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        if (i) text << '\n';
        text << "instance = " << r.instance << "\nanswer = " << to_string(r.answer) << "\ndc_volts = " << r.dc
             << "\ncut_volts = " << r.cut << "\nmargin_volts = " << r.margin << "\noracle = " << oracle
             << "\nconfig_hash = " << config_hash(rc) << "\nseed = " << (analog ? r.seed : rc.analog.seed) << '\n';
        if (r.trace) {
            if (o.trace) s.emit("trace_" + std::to_string(i) + ".csv", csv_trace(*r.trace, s.provenance()));
            if (o.spectrum)
                s.emit("spectrum_" + std::to_string(i) + ".csv", spectrum_to_csv(dft(*r.trace), s.provenance()));
        }
    }
    s.out() << text.str();
    s.emit("decisions.txt", s.provenance() + text.str());
    if (recs.size() == 1) return recs.front().answer == Answer::Yes ? kExitYes : kExitNo;
    return kExitNo;
}

struct SpectrumOptions {
    std::string instance;
    bool simulate = false;
};

inline int cmd_spectrum(Session& s, const SpectrumOptions& o) {
    const auto inst = parse_instance(o.instance);
    const auto analytic = analytic_spectrum(inst);
    const std::string a_csv = spectrum_to_csv(analytic, s.provenance());
    s.out() << a_csv;
    s.emit("analytic.csv", a_csv);
    if (!o.simulate) return 0;

    NonidealityConfig cfg = NonidealityConfig::ideal();
    cfg.seed = s.config().analog.seed;
    SamplingPlan plan = s.config().plan;
    const auto g = make_grid(inst, cfg, plan);
    // Sample at least four times per period of the highest line, on a step
    // that divides the alignment period.
    const double steps = std::ceil(std::max(g.period / plan.tau, 4.0 * g.f_max * g.period) - 1e-9);
    plan.tau = g.period / steps;
    const auto run = run_pipeline(inst, cfg, FilterSpec{FilterKind::None}, plan);
    auto measured = dft(run.trace);
    const std::string m_csv = spectrum_to_csv(measured, s.provenance());
    s.out() << "\n" << m_csv;
    s.emit("measured.csv", m_csv);
    return 0;
}

struct CalibrateOptions {
    std::string yes_file;
    std::string no_file;
    unsigned rounds = 2;
};

/// Average stage offsets over every NO training instance that has the stage.
inline OffsetReport pooled_offsets(const std::vector<CpiInstance>& no_set, const NonidealityConfig& cfg,
                                   const SamplingPlan& plan) {
    std::vector<double> sum;
    std::vector<std::size_t> count;
    for (const auto& inst : no_set) {
        if (inst.size() < 2) continue;
        const auto rep = measure_stage_offsets(inst, cfg, plan);
        if (rep.per_stage_dc.size() > sum.size()) {
            sum.resize(rep.per_stage_dc.size(), 0.0);
            count.resize(rep.per_stage_dc.size(), 0);
        }
        for (std::size_t k = 0; k < rep.per_stage_dc.size(); ++k) {
            sum[k] += rep.per_stage_dc[k];
            ++count[k];
        }
    }
    if (sum.empty()) throw InvalidInput("calibration needs a NO training instance with at least two values");
    OffsetReport out{{}, no_set.front(), true};
    for (std::size_t k = 0; k < sum.size(); ++k) out.per_stage_dc.push_back(sum[k] / static_cast<double>(count[k]));
    return out;
}

inline int cmd_calibrate(Session& s, const CalibrateOptions& o) {
    const auto yes = parse_instance_file(read_file(o.yes_file));
    const auto no = parse_instance_file(read_file(o.no_file));
    if (yes.empty() || no.empty()) throw InvalidInput("calibrate: both training files must contain instances");
    for (const auto& i : no)
        if (decide_exact(i)) throw InvalidInput("training NO-instance (" + to_string(i) + ") is a YES-instance");

    RunConfig rc = s.config();
    Calibration cal;
    for (unsigned r = 0; r < o.rounds; ++r) {
        const auto rep = pooled_offsets(no, rc.analog, rc.plan);
        if (r == 0) cal.measured_offsets = rep.per_stage_dc;
        NonidealityConfig base = rc.analog;
        if (base.z_compensation.size() > 1 && base.z_compensation.size() != rep.per_stage_dc.size())
            base.z_compensation.resize(rep.per_stage_dc.size(), 0.0);
        rc.analog = compensate(base, rep);
    }
    cal.z_compensation = rc.analog.z_compensation;
    cal.threshold = bootstrap_threshold(yes, no, rc.analog, rc.filter, rc.plan);
    const std::string text = to_calibration_text(cal);
    s.out() << text;
    s.emit("calibration.txt", s.provenance() + text);
    if (!cal.threshold.separable) s.err() << "warning: training bands overlap; the calibration is not separable\n";
    return 0;
}

struct SatOptions {
    std::string file;
    std::string backend = "exact-dp";
    bool strict_dimacs = false;
};

inline int cmd_sat(Session& s, const SatOptions& o) {
    std::vector<std::string> warnings;
    const auto f = parse_dimacs(read_file(o.file), DimacsOptions{o.strict_dimacs}, &warnings);
    for (const auto& w : warnings) s.err() << "c warning: " << w << '\n';
    OracleBackend backend;
    if (o.backend == "exact-dp" || o.backend == "exact") backend = exact_dp_backend();
    else if (o.backend == "exact-bf") backend = exact_bruteforce_backend();
    else if (o.backend == "analog") {
        AnalogBackendOptions ao;
        ao.cfg = s.config().analog;
        ao.spec = s.config().filter;
        ao.plan = s.config().plan;
        backend = analog_backend(ao);
    } else {
        throw InvalidInput("unknown backend '" + o.backend + "'");
    }
    const auto res = extract_witness(f, backend);
    const std::string text = format_solution(res);
    s.out() << "c oracle calls: " << res.oracle_calls << '\n' << text;
    s.emit("solution.txt", s.provenance("c") + text);
    return res.satisfiable ? kExitSat : kExitUnsat;
}

inline int cmd_netlist(Session& s, const std::string& instance) {
    const auto inst = parse_instance(instance);
    const auto doc = emit_netlist(inst, s.config().analog, s.config().filter, s.config().plan);
    const std::string text = doc.title + "\n" + s.provenance("*") +
                             doc.text().substr(doc.title.size() + 1);
    s.out() << text;
    std::string name = "cascade";
    for (auto v : inst.values()) name += "_" + std::to_string(v);
    s.emit(name + ".cir", text);
    return 0;
}

struct GenOptions {
    std::size_t n = 3;
    std::uint64_t max_mag = 10;
    std::string kind = "yes";
    std::size_t count = 1;
};

inline int cmd_gen(Session& s, const GenOptions& o) {
    Answer kind;
    if (o.kind == "yes" || o.kind == "YES") kind = Answer::Yes;
    else if (o.kind == "no" || o.kind == "NO") kind = Answer::No;
    else throw InvalidInput("gen: --kind must be yes or no");
    std::vector<CpiInstance> insts;
    for (std::size_t i = 0; i < o.count; ++i)
        insts.push_back(random_instance(o.n, o.max_mag, kind, sub_seed(s.config().analog.seed, Stream::Batch, i)));
    const std::string text = s.provenance() + to_instance_file(insts);
    s.out() << text;
    s.emit(std::string(o.kind == "yes" || o.kind == "YES" ? "yes" : "no") + "_instances.txt", text);
    return 0;
}

/// Entry point; args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulated analogue PARTITION oracle: decide, inspect spectra, calibrate, solve SAT"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    GlobalOptions g;
    app.add_option("--config", g.config_path, "Flat key = value config file");
    app.add_option("--seed", g.seed, "Seed for every random choice");
    app.add_option("--oracle", g.oracle, "exact-dp | exact-bf | analog | analog-ideal");
    app.add_option("--filter", g.filter, "brickwall | one-pole | none");
    app.add_option("--f0", g.f0, "Low-pass cutoff in Hz");
    app.add_option("--jobs", g.jobs, "Worker threads for batch decide");
    app.add_option("--out", g.out_dir, "Directory for output files");
    app.add_flag("--strict", g.strict, "Reject instances beyond the multiplier bandwidth");

    DecideOptions dec;
    auto* decide = app.add_subcommand("decide", "Decide PARTITION instances");
    decide->fallthrough();
    decide->add_option("instances", dec.instances, "Instances, e.g. \"3 2 5\"");
    decide->add_option("--file", dec.file, "Instance file, one per line");
    decide->add_option("--calibration", dec.calibration, "Calibration file from `calibrate`");
    decide->add_flag("--trace", dec.trace, "Write the sampled trace CSV (analog oracles)");
    decide->add_flag("--spectrum", dec.spectrum, "Write the measured spectrum CSV (analog oracles)");

    SpectrumOptions spec;
    auto* spectrum = app.add_subcommand("spectrum", "Analytic (and simulated) spectrum of an instance");
    spectrum->fallthrough();
    spectrum->add_option("instance", spec.instance)->required();
    spectrum->add_flag("--simulate", spec.simulate, "Also emit the DFT of the simulated ideal chain");

    CalibrateOptions cal;
    auto* calibrate = app.add_subcommand("calibrate", "Compensate offsets and learn decision bands");
    calibrate->fallthrough();
    calibrate->add_option("--yes", cal.yes_file, "YES training instances")->required();
    calibrate->add_option("--no", cal.no_file, "NO training instances")->required();
    calibrate->add_option("--rounds", cal.rounds, "Measure/compensate rounds");

    SatOptions sat;
    auto* satcmd = app.add_subcommand("sat", "Solve a DIMACS CNF by self-reduction");
    satcmd->fallthrough();
    satcmd->add_option("file", sat.file)->required();
    satcmd->add_option("--backend", sat.backend, "exact-dp | exact-bf | analog");
    satcmd->add_flag("--strict-dimacs", sat.strict_dimacs, "Treat header count mismatches as errors");

    std::string netlist_instance;
    auto* netlist = app.add_subcommand("netlist", "Emit a SPICE netlist of the cascade");
    netlist->fallthrough();
    netlist->add_option("instance", netlist_instance)->required();

    GenOptions gen;
    auto* gencmd = app.add_subcommand("gen", "Generate labelled random instances");
    gencmd->fallthrough();
    gencmd->add_option("--n", gen.n, "Values per instance");
    gencmd->add_option("--max", gen.max_mag, "Largest value");
    gencmd->add_option("--kind", gen.kind, "yes | no");
    gencmd->add_option("--count", gen.count, "Number of instances");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : kExitError;
    }

    std::string command_line;
    for (const auto& a : args) command_line += (command_line.empty() ? "" : " ") + a;

    const auto t0 = std::chrono::steady_clock::now();
    try {
        Session session(g, command_line, out, err);
        int code = 0;
        if (*decide) code = cmd_decide(session, dec);
        else if (*spectrum) code = cmd_spectrum(session, spec);
        else if (*calibrate) code = cmd_calibrate(session, cal);
        else if (*satcmd) code = cmd_sat(session, sat);
        else if (*netlist) code = cmd_netlist(session, netlist_instance);
        else if (*gencmd) code = cmd_gen(session, gen);
        session.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return code;
    } catch (const MagnitudeOverflow& e) {
        err << "error: " << e.what() << " (requires " << e.required_bits() << " bits)\n";
    } catch (const OracleFailure& e) {
        err << "error: " << e.what() << "; partial assignment:";
        for (std::size_t i = 0; i < e.prefix().size(); ++i) err << ' ' << (e.prefix()[i] ? "" : "-") << i + 1;
        err << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return kExitError;
}

}  // namespace cpi::cli

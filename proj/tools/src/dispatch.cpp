#include "seqgen/cli/dispatch.hpp"

#include "seqgen/channel.hpp"
#include "seqgen/cli/claims.hpp"
#include "seqgen/cli/output.hpp"
#include "seqgen/conveyor.hpp"
#include "seqgen/errors.hpp"
#include "seqgen/grammar.hpp"
#include "seqgen/halfline_walk.hpp"
#include "seqgen/motzkin.hpp"
#include "seqgen/pda.hpp"
#include "seqgen/rng.hpp"
#include "seqgen/switches.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#ifndef SEQGEN_VERSION
#define SEQGEN_VERSION "0.0.0"
#endif

namespace seqgen::cli {

namespace {

using Clock = std::chrono::steady_clock;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void usage(const std::string &message) { throw UsageError(message); }

std::vector<double> parse_list(const std::string &text, const std::string &flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception &) {
            usage(flag + ": '" + item + "' is not a number");
        }
        if (used != item.size()) {
            usage(flag + ": '" + item + "' is not a number");
        }
        out.push_back(v);
    }
    return out;
}

void check_out(const std::string &out) {
    if (out.empty()) {
        usage("--out is required");
    }
    const auto parent = std::filesystem::path(out).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent)) {
        usage("--out: directory " + parent.string() + " does not exist");
    }
}

// --weights w+,w-,w0[,w0b]; w0b defaults to the bulk so that the boundary push equals w+.
motzkin::MotzkinEnsemble ensemble_from_flags(std::size_t n, int colors, const std::string &weights) {
    if (weights.empty()) {
        return motzkin::MotzkinEnsemble::unbiased(n, colors, 0.25 / colors);
    }
    const auto w = parse_list(weights, "--weights");
    if (w.size() != 3 && w.size() != 4) {
        usage("--weights expects w+,w-,w0 or w+,w-,w0,w0b");
    }
    const double s = colors;
    const double w0b = w.size() == 4 ? w[3] : 1.0 - s * w[0];
    return motzkin::MotzkinEnsemble::make(n, colors, w[0], w[1], w[2], (1.0 - w0b) / s, w0b);
}

std::map<std::string, std::string> collect_params(const CLI::App &sub) {
    std::map<std::string, std::string> params;
    for (const auto *opt : sub.get_options()) {
        if (opt == sub.get_help_ptr()) {
            continue;
        }
        const std::string name = opt->get_name(false, true);
        std::string value;
        if (opt->count() > 0) {
            for (const auto &r : opt->results()) {
                value += (value.empty() ? "" : ",") + r;
            }
        } else {
            value = opt->get_default_str();
        }
        if (!value.empty()) { // optional flags without a default are left out when unset
            params[name] = value;
        }
    }
    return params;
}

struct Context {
    std::uint64_t seed = 1;
    std::ostream &out;
    Clock::time_point started;

    RunManifest manifest(const CLI::App &sub) const {
        RunManifest m;
        m.subcommand = sub.get_name();
        m.params = collect_params(sub);
        m.seed = seed;
        m.version = SEQGEN_VERSION;
        return m;
    }

    void finish(const CLI::App &sub, const std::string &path, const CsvTable &table) const {
        write_outputs(path, table, manifest(sub), started);
        out << "wrote " << path << " (" << table.rows() << " rows) and " << manifest_path(path) << "\n";
    }
};

struct WalkArgs {
    double gamma_l = 0.0;
    double gamma_r = 0.0;
    double gamma_0 = 0.0;
    std::size_t steps = 1;
    std::size_t horizon = 1024;
    std::string out;
};

void run_walk(const CLI::App &sub, const WalkArgs &a, const Context &ctx) {
    check_out(a.out);
    const std::optional<double> g0 = sub.count("--gamma-0") ? std::optional<double>(a.gamma_0) : std::nullopt;
    const auto spec = walk::TransitionSpec::make(a.gamma_l, a.gamma_r, g0);
    const auto series = walk::walk_series(spec, a.horizon);
    CsvTable table({"t", "p0", "mean", "msd"});
    table.comment("walk gamma_l=" + format_number(spec.gamma_left) + " gamma_r=" + format_number(spec.gamma_right) +
                  " gamma_0=" + format_number(spec.gamma_boundary));
    if (spec.gamma_left > 0.0) {
        table.comment(std::string("phase ") + walk::to_string(walk::classify_phase(spec)));
    }
    for (std::size_t t = a.steps; t <= a.horizon; t += a.steps) {
        table.row({static_cast<double>(t), series.p0[t - 1], series.mean[t - 1], series.msd[t - 1]});
    }
    ctx.finish(sub, a.out, table);
}

struct ChannelArgs {
    std::string file;
    std::size_t n = 0;
    std::size_t cut = 0;
    int order = 2;
    std::string out;
};

void run_channel(const CLI::App &sub, const ChannelArgs &a, const Context &ctx) {
    check_out(a.out);
    if (a.n < 2) {
        usage("--n must be at least 2 so that a cut exists");
    }
    if (sub.count("--cut") && (a.cut < 1 || a.cut >= a.n)) {
        usage("--cut must lie in [1, n-1]");
    }
    const auto doc = load_channel_document(a.file);
    const auto rho = apply_channel_n(DensityOperator::basis(doc.family.emitter_dim(), doc.start), doc.family, a.n);
    const double success = rho.matrix(static_cast<Eigen::Index>(doc.final_state),
                                      static_cast<Eigen::Index>(doc.final_state))
                               .real();
    CsvTable table({"l", "renyi_n", "success_probability"});
    table.comment("channel " + std::filesystem::path(a.file).filename().string() + " order " +
                  std::to_string(a.order));
    const std::size_t lo = sub.count("--cut") ? a.cut : 1;
    const std::size_t hi = sub.count("--cut") ? a.cut : a.n - 1;
    for (std::size_t l = lo; l <= hi; ++l) {
        const double s = renyi_entropy_channel(doc.family, doc.start, doc.final_state, a.n, l, a.order);
        table.row({static_cast<double>(l), s, success});
    }
    ctx.finish(sub, a.out, table);
}

struct MotzkinArgs {
    std::size_t n = 0;
    int colors = 1;
    std::size_t cut = 0;
    std::string weights;
    std::string out;
};

void run_motzkin(const CLI::App &sub, const MotzkinArgs &a, const Context &ctx) {
    check_out(a.out);
    if (a.n < 2) {
        usage("--n must be at least 2");
    }
    if (sub.count("--cut") && (a.cut < 1 || a.cut >= a.n)) {
        usage("--cut must lie in [1, n-1]");
    }
    const auto e = ensemble_from_flags(a.n, a.colors, a.weights);
    const motzkin::HeightDp dp(e);
    CsvTable table({"l", "entropy", "renyi2", "height_mean"});
    table.comment("motzkin s=" + std::to_string(e.colors) + " w+=" + format_number(e.w_plus) +
                  " w-=" + format_number(e.w_minus) + " w0=" + format_number(e.w_zero) +
                  " w+b=" + format_number(e.w_plus_boundary) + " w0b=" + format_number(e.w_zero_boundary));
    const std::size_t lo = sub.count("--cut") ? a.cut : 1;
    const std::size_t hi = sub.count("--cut") ? a.cut : a.n - 1;
    for (std::size_t l = lo; l <= hi; ++l) {
        const auto sp = dp.spectrum(l);
        table.row({static_cast<double>(l), sp.entropy(), sp.renyi(2.0), sp.height_mean()});
    }
    ctx.finish(sub, a.out, table);
}

struct PdaArgs {
    std::string grammar;
    std::vector<std::size_t> n;
    std::size_t trials = 10000;
    std::string schedule = "none";
    std::string out;
};

void run_pda(const CLI::App &sub, const PdaArgs &a, const Context &ctx) {
    check_out(a.out);
    if (a.n.empty()) {
        usage("--n needs at least one length");
    }
    const auto schedule = a.schedule == "push-pop" ? qpda::BiasSchedule::PushPop : qpda::BiasSchedule::None;
    const auto pda = qpda::compile_to_pda(qpda::load_grammar(a.grammar));
    const auto rep = qpda::postselection_rate(pda, a.n, a.trials, ctx.seed, schedule);
    CsvTable table({"n", "trials", "accepted", "rate", "ci_low", "ci_high"});
    table.comment("pda " + std::filesystem::path(a.grammar).filename().string() + " schedule " + a.schedule);
    for (const auto &p : rep.points) {
        table.row({static_cast<double>(p.n), static_cast<double>(p.trials), static_cast<double>(p.accepted), p.rate,
                   p.ci.lo, p.ci.hi});
    }
    for (const auto &w : rep.warnings) {
        ctx.out << "warning: " << w << "\n";
    }
    ctx.out << "regime: " << qpda::to_string(rep.regime) << "\n";
    if (rep.has_power_fit) {
        ctx.out << "power fit: " << rep.power.describe() << "\n";
    }
    ctx.finish(sub, a.out, table);
}

struct ConveyorArgs {
    std::string mode;
    std::string grammar;
    std::size_t n = 0;
    std::size_t width = 0;
    int colors = 2;
    std::string weights;
    std::size_t samples = 0;
    std::size_t audit = 0;
    std::string out;
};

constexpr std::size_t kExactConveyorLimit = 14;

void run_conveyor(const CLI::App &sub, const ConveyorArgs &a, const Context &ctx) {
    check_out(a.out);
    if (a.n < 1) {
        usage("--n must be positive");
    }
    conveyor::GateStats stats;
    if (a.mode == "two") {
        if (sub.count("--grammar")) {
            usage("--grammar only applies to --mode three");
        }
        if (a.samples == 0 && a.n > kExactConveyorLimit) {
            usage("exact branch simulation is limited to N <= " + std::to_string(kExactConveyorLimit) +
                  "; pass --samples for trajectory statistics");
        }
        const auto e = ensemble_from_flags(a.n, a.colors, a.weights);
        if (a.audit > 0) {
            conveyor::AuditReport total;
            for (std::size_t i = 0; i < a.audit; ++i) {
                const auto tr = conveyor::sample_two_leg(a.n, e, derive_seed(ctx.seed, "audit", i), a.width);
                const auto rep = conveyor::markovianity_audit(tr);
                total.particles += rep.particles;
                total.pops += rep.pops;
                total.stays += rep.stays;
                total.pushes += rep.pushes;
                total.max_nontrivial_per_particle =
                    std::max(total.max_nontrivial_per_particle, rep.max_nontrivial_per_particle);
            }
            ctx.out << "audit: " << a.audit << " trajectories, " << total.particles << " particles (" << total.pops
                    << " pop, " << total.stays << " stay, " << total.pushes << " push), max nontrivial gates per particle "
                    << total.max_nontrivial_per_particle << "\n";
        }
        if (a.samples == 0) {
            const auto res = conveyor::run_two_leg(a.n, e, a.width);
            ctx.out << "success probability " << format_number(res.success_probability) << ", support "
                    << res.state.support_size() << "\n";
            stats = res.stats;
        } else {
            stats = conveyor::sampled_gate_stats(a.n, e, a.samples, ctx.seed, a.width);
        }
    } else {
        if (a.grammar.empty()) {
            usage("--mode three needs --grammar");
        }
        if (a.audit > 0 || a.samples > 0) {
            usage("--audit and --samples only apply to --mode two");
        }
        if (a.n > kExactConveyorLimit) {
            usage("three-leg simulation is limited to N <= " + std::to_string(kExactConveyorLimit));
        }
        const auto g = qpda::load_grammar(a.grammar);
        const auto res = conveyor::run_three_leg(g, a.n, a.width);
        ctx.out << "success probability " << format_number(res.success_probability) << ", pruned weight "
                << format_number(res.pruned_weight) << ", support " << res.state.support_size() << "\n";
        stats = res.stats;
    }
    CsvTable table({"t", "nontrivial_gates", "active_width"});
    table.comment("conveyor mode " + a.mode + (a.samples ? " sampled " + std::to_string(a.samples) : " exact"));
    for (std::size_t t = 0; t < stats.timesteps; ++t) {
        table.row({static_cast<double>(t + 1), static_cast<double>(stats.nontrivial_gates[t]),
                   static_cast<double>(stats.active_width[t])});
    }
    ctx.finish(sub, a.out, table);
}

struct SwitchArgs {
    std::string aux = "diffusive1d";
    std::size_t t = 0;
    std::size_t trials = 1000;
    double drift = 0.5;
    double trap_mu = 0.0;
    std::size_t points = 48;
    std::string out;
};

void run_switch(const CLI::App &sub, const SwitchArgs &a, const Context &ctx) {
    check_out(a.out);
    if (a.t < 1) {
        usage("--t must be positive");
    }
    if (sub.count("--trap-mu") && sub.count("--aux")) {
        usage("--trap-mu selects the random-trap walk; drop --aux");
    }
    const auto times = log_grid(1, a.t, std::min(a.points, a.t));
    switches::TraceEnsemble ens;
    CsvTable table({"t", "mean_x", "msd", "flips"});
    if (sub.count("--trap-mu")) {
        const switches::RandomRateField field{switches::RandomRateField::Kind::Trap, a.trap_mu,
                                              derive_seed(ctx.seed, "trap-field")};
        table.comment("switch trap mu=" + format_number(a.trap_mu) + " predicted exponent " +
                      format_number(field.predicted_exponent()));
        ens = switches::subdiffusive_ensemble(field, a.t, a.trials, ctx.seed, times);
    } else {
        const auto aux = switches::AuxWalkerModel::parse(a.aux);
        table.comment("switch aux=" + a.aux + " drift=" + format_number(a.drift));
        ens = switches::levy_ensemble(aux, a.t, a.drift, a.trials, ctx.seed, times);
    }
    const auto mean = ens.mean_position();
    const auto msd = ens.mean_square();
    for (std::size_t i = 0; i < ens.sample_times.size(); ++i) {
        const double flips = i < ens.mean_flips.size() ? ens.mean_flips[i] : 0.0;
        table.row({static_cast<double>(ens.sample_times[i]), mean[i], msd[i], flips});
    }
    ctx.finish(sub, a.out, table);
}

struct ReproArgs {
    std::string claim;
    std::string out;
};

void run_repro(const CLI::App &sub, const ReproArgs &a, const Context &ctx) {
    if (!a.out.empty()) {
        check_out(a.out);
    }
    const auto res = run_claim(a.claim, ctx.seed);
    CsvTable table({"check", "x", "y"});
    table.comment("repro " + a.claim);
    for (std::size_t c = 0; c < res.checks.size(); ++c) {
        const auto &ch = res.checks[c];
        ctx.out << ch.label << ": " << ch.fit.describe() << "\n";
        ctx.out << "  target " << ch.target << " +/- " << ch.tolerance << ": "
                << (ch.passed() ? "within tolerance" : "outside tolerance") << "\n";
        for (std::size_t i = 0; i < ch.x.size(); ++i) {
            table.row({static_cast<double>(c), ch.x[i], ch.y[i]});
        }
    }
    for (const auto &n : res.notes) {
        ctx.out << "note: " << n << "\n";
    }
    if (!a.out.empty()) {
        ctx.finish(sub, a.out, table);
    }
}

} // namespace

int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"seqgen: sequential generation of states by open quantum systems", "seqgen"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_version_flag("--version", SEQGEN_VERSION);
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "master seed for every random stream");

    const auto positive = CLI::PositiveNumber;

    WalkArgs walk_args;
    auto *walk = app.add_subcommand("walk", "half-line walk: return probability, mean and msd");
    walk->add_option("--gamma-l", walk_args.gamma_l, "left hop probability")->required()->check(CLI::Range(0.0, 1.0));
    walk->add_option("--gamma-r", walk_args.gamma_r, "right hop probability")->required()->check(CLI::Range(0.0, 1.0));
    walk->add_option("--gamma-0", walk_args.gamma_0, "hop out of the wall (default gamma-r)")
        ->check(CLI::Range(0.0, 1.0))
        ->default_str("");
    walk->add_option("--steps", walk_args.steps, "write every k-th timestep")->check(positive);
    walk->add_option("--horizon", walk_args.horizon, "number of timesteps")->check(positive);
    walk->add_option("--out", walk_args.out, "output csv")->required();

    ChannelArgs channel_args;
    auto *channel = app.add_subcommand("channel", "Renyi entropies of a channel-generated state");
    channel->add_option("--file", channel_args.file, "channel json")->required()->check(CLI::ExistingFile);
    channel->add_option("--n", channel_args.n, "emitted symbols")->required();
    channel->add_option("--cut", channel_args.cut, "single cut (default: all)")->default_str("");
    channel->add_option("--order", channel_args.order, "integer Renyi order")->check(CLI::Range(2, 16));
    channel->add_option("--out", channel_args.out, "output csv")->required();

    MotzkinArgs motzkin_args;
    auto *motz = app.add_subcommand("motzkin", "Motzkin emitter entanglement profile");
    motz->add_option("--n", motzkin_args.n, "chain length")->required();
    motz->add_option("--colors", motzkin_args.colors, "number of colors s")->check(CLI::Range(1, 16));
    motz->add_option("--cut", motzkin_args.cut, "single cut (default: all)")->default_str("");
    motz->add_option("--weights", motzkin_args.weights, "w+,w-,w0[,w0b] (default: unbiased)");
    motz->add_option("--out", motzkin_args.out, "output csv")->required();

    PdaArgs pda_args;
    auto *pda = app.add_subcommand("pda", "post-selection rate of a grammar-compiled PDA");
    pda->add_option("--grammar", pda_args.grammar, "CNF grammar file")->required()->check(CLI::ExistingFile);
    pda->add_option("--n", pda_args.n, "emitted lengths")->required()->delimiter(',')->check(positive);
    pda->add_option("--trials", pda_args.trials, "sampled runs per length")->check(positive);
    pda->add_option("--schedule", pda_args.schedule, "bias schedule")->check(CLI::IsMember({"none", "push-pop"}));
    pda->add_option("--out", pda_args.out, "output csv")->required();

    ConveyorArgs conv_args;
    auto *conv = app.add_subcommand("conveyor", "conveyor-belt circuit gate accounting");
    conv->add_option("--mode", conv_args.mode, "two or three legs")->required()->check(CLI::IsMember({"two", "three"}));
    conv->add_option("--grammar", conv_args.grammar, "CNF grammar file (three legs)")->check(CLI::ExistingFile);
    conv->add_option("--n", conv_args.n, "emitted symbols")->required();
    conv->add_option("--width", conv_args.width, "belt width (0: automatic)");
    conv->add_option("--colors", conv_args.colors, "Motzkin colors (two legs)")->check(CLI::Range(1, 9));
    conv->add_option("--weights", conv_args.weights, "w+,w-,w0[,w0b] (two legs)");
    conv->add_option("--samples", conv_args.samples, "sampled trajectories instead of exact branches");
    conv->add_option("--audit", conv_args.audit, "trajectories to audit for one-gate-per-particle");
    conv->add_option("--out", conv_args.out, "output csv")->required();

    SwitchArgs switch_args;
    auto *sw = app.add_subcommand("switch", "switch-controlled and random-rate walks");
    sw->add_option("--aux", switch_args.aux, "aux walker")
        ->check(CLI::IsMember({"diffusive1d", "ballistic1d", "diffusive2d"}));
    sw->add_option("--t", switch_args.t, "horizon")->required()->check(positive);
    sw->add_option("--trials", switch_args.trials, "traces")->check(positive);
    sw->add_option("--drift", switch_args.drift, "head bias magnitude")->check(CLI::Range(-1.0, 1.0));
    sw->add_option("--trap-mu", switch_args.trap_mu, "random-trap exponent mu (selects the trap model)")
        ->check(CLI::Range(1e-6, 1e6))->default_str("");
    sw->add_option("--points", switch_args.points, "log-spaced sample times")->check(CLI::Range(2, 100000));
    sw->add_option("--out", switch_args.out, "output csv")->required();

    ReproArgs repro_args;
    auto *repro = app.add_subcommand("repro", "rerun a bundled scaling claim and print its fit");
    repro->add_option("--claim", repro_args.claim, "claim name")->required()->check(CLI::IsMember(claim_names()));
    repro->add_option("--out", repro_args.out, "optional csv of the fitted series");

    for (auto *sub : app.get_subcommands({})) {
        sub->fallthrough();
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::Success &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        err << "usage error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    const Context ctx{seed, out, Clock::now()};
    const CLI::App *sub = app.get_subcommands().front();
    try {
        if (sub == walk) {
            run_walk(*sub, walk_args, ctx);
        } else if (sub == channel) {
            run_channel(*sub, channel_args, ctx);
        } else if (sub == motz) {
            run_motzkin(*sub, motzkin_args, ctx);
        } else if (sub == pda) {
            run_pda(*sub, pda_args, ctx);
        } else if (sub == conv) {
            run_conveyor(*sub, conv_args, ctx);
        } else if (sub == sw) {
            run_switch(*sub, switch_args, ctx);
        } else {
            run_repro(*sub, repro_args, ctx);
        }
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << "\n\n" << sub->help();
        return kExitUsage;
    } catch (const Error &e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitOk;
}

int dispatch(int argc, const char *const *argv) {
    std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

} // namespace seqgen::cli

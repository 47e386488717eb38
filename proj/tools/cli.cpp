#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imbalance/experiment.hpp"
#include "imbalance/synth.hpp"
#include "imbalance/verify.hpp"

namespace imbalance::cli {

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Options shared by the experiment subcommands.
struct Overrides {
    std::string config_path;
    std::optional<std::string> loss;
    std::optional<double> ratio;
    std::optional<std::string> preset;
    std::vector<std::uint64_t> seeds;
    std::optional<std::size_t> epochs;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> gamma;
    std::optional<std::string> transform;
    std::optional<std::string> arch;
    std::string out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "Experiment config JSON");
    cmd->add_option("--loss", o.loss, "Loss kind: CE, WCE, DL_sample, DL_set, TL, DSC_selfadj, FL");
    cmd->add_option("--ratio", o.ratio, "Negatives per positive");
    cmd->add_option("--preset", o.preset, "Ratio preset: conll03, ontonotes5, squad1, squad2, quoref");
    cmd->add_option("--seed", o.seeds, "Replicate seed (repeatable)");
    cmd->add_option("--epochs", o.epochs, "Training epochs");
    cmd->add_option("--alpha", o.alpha, "Loss alpha");
    cmd->add_option("--beta", o.beta, "Loss beta");
    cmd->add_option("--gamma", o.gamma, "Loss gamma");
    cmd->add_option("--transform", o.transform,
                    "original, add_positive, add_negative, downsample_negative, add_both");
    cmd->add_option("--arch", o.arch, "linear or mlp");
    cmd->add_option("--out", o.out, "Output path (default: stdout)");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw IoError("cannot write '" + path + "'");
    }
    file << text;
    if (!file.flush()) {
        throw IoError("write to '" + path + "' failed");
    }
}

void apply_loss_hyperparameters(LossSpec& loss, const Overrides& o) {
    if (o.alpha) {
        loss.alpha = *o.alpha;
    }
    if (o.beta) {
        loss.beta = *o.beta;
    }
    if (o.gamma) {
        loss.gamma = *o.gamma;
    }
}

ExperimentConfig load_config(const Overrides& o) {
    ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : config_from_json(read_file(o.config_path));
    try {
        if (o.loss) {
            const LossKind kind = loss_kind_from_string(*o.loss);
            if (kind != c.loss.kind) {
                c.loss = LossSpec::defaults_for(kind);
            }
        }
        apply_loss_hyperparameters(c.loss, o);
        if (o.preset) {
            c.data.ratio = ratio_preset(*o.preset);
        }
        if (o.ratio) {
            c.data.ratio = *o.ratio;
        }
        if (!o.seeds.empty()) {
            c.replicate_seeds = o.seeds;
        }
        if (o.epochs) {
            c.train.epochs = *o.epochs;
        }
        if (o.transform) {
            c.transform.kind = transform_kind_from_string(*o.transform);
        }
        if (o.arch) {
            c.model.arch = arch_from_string(*o.arch);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    c.validate();
    return c;
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream ss;
    write_results_csv(ss, rows);
    return ss.str();
}

template <class T>
std::vector<T> parse_list(const std::string& text, T (*parse)(const std::string&)) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(parse(item));
        }
    }
    if (out.empty()) {
        throw ConfigError("empty list '" + text + "'");
    }
    return out;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size()) {
        throw ConfigError("not a number: '" + s + "'");
    }
    return v;
}

LossKind parse_kind(const std::string& s) {
    try {
        return loss_kind_from_string(s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Imbalance-aware classification losses: experiments and gradient checks", "imbalance"};
    app.require_subcommand(1);

    Overrides run_opts;
    auto* run_cmd = app.add_subcommand("run", "Train and evaluate one configuration over its replicate seeds");
    add_overrides(run_cmd, run_opts);

    Overrides sweep_opts;
    std::string sweep_losses = "CE,WCE,DL_sample,DL_set,TL,DSC_selfadj,FL";
    std::string sweep_ratios = "1,10,100";
    auto* sweep_cmd = app.add_subcommand("sweep", "Run every loss at every ratio");
    add_overrides(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--losses", sweep_losses, "Comma-separated loss kinds");
    sweep_cmd->add_option("--ratios", sweep_ratios, "Comma-separated neg:pos ratios");

    Overrides tversky_opts;
    std::string tversky_alphas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
    auto* tversky_cmd = app.add_subcommand("sweep-tversky", "Tversky loss over alpha with beta = 1 - alpha");
    add_overrides(tversky_cmd, tversky_opts);
    tversky_cmd->add_option("--alphas", tversky_alphas, "Comma-separated alphas in (0,1)");

    std::size_t gc_samples = 200;
    std::uint64_t gc_seed = 0;
    std::string gc_out;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
    gc_cmd->add_option("--samples", gc_samples, "Samples per loss kind");
    gc_cmd->add_option("--seed", gc_seed, "Sampling seed");
    gc_cmd->add_option("--out", gc_out, "JSON report path (default: stdout)");

    Overrides gen_opts;
    std::optional<std::size_t> gen_n_positive;
    std::optional<double> gen_easy_fraction;
    std::optional<double> gen_target_fraction;
    auto* gen_cmd = app.add_subcommand("gen-data", "Write a (transformed) synthetic training set as CSV");
    gen_cmd->add_option("--config", gen_opts.config_path, "Experiment config JSON");
    gen_cmd->add_option("--ratio", gen_opts.ratio, "Negatives per positive");
    gen_cmd->add_option("--preset", gen_opts.preset, "Ratio preset name");
    gen_cmd->add_option("--seed", gen_opts.seeds, "Data seed")->expected(1);
    gen_cmd->add_option("--n-positive", gen_n_positive, "Number of positives");
    gen_cmd->add_option("--easy-fraction", gen_easy_fraction, "Fraction of easy negatives");
    gen_cmd->add_option("--transform", gen_opts.transform, "Resampling transform");
    gen_cmd->add_option("--target-fraction", gen_target_fraction, "Target positive fraction for the transform");
    gen_cmd->add_option("--out", gen_opts.out, "CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run_cmd) {
            const auto config = load_config(run_opts);
            emit(run_opts.out, rows_to_csv(run(config)), out);
        } else if (*sweep_cmd) {
            const auto config = load_config(sweep_opts);
            std::vector<LossSpec> losses;
            for (const LossKind kind : parse_list<LossKind>(sweep_losses, parse_kind)) {
                LossSpec spec = kind == config.loss.kind ? config.loss : LossSpec::defaults_for(kind);
                apply_loss_hyperparameters(spec, sweep_opts);
                losses.push_back(spec);
            }
            emit(sweep_opts.out, rows_to_csv(sweep(config, losses, parse_list<double>(sweep_ratios, parse_double))),
                 out);
        } else if (*tversky_cmd) {
            if (!tversky_opts.loss) {
                tversky_opts.loss = "TL";
            }
            const auto config = load_config(tversky_opts);
            emit(tversky_opts.out,
                 rows_to_csv(sweep_tversky(config, parse_list<double>(tversky_alphas, parse_double))), out);
        } else if (*gc_cmd) {
            if (gc_samples < 1) {
                err << "gradcheck: --samples must be >= 1\n";
                return kExitUsage;
            }
            const auto reports = gradcheck_all(gc_samples, gc_seed);
            emit(gc_out, gradcheck_to_json(reports) + "\n", out);
            bool passed = true;
            for (const auto& r : reports) {
                passed = passed && r.passed;
                if (!r.passed) {
                    err << "gradcheck: " << to_string(r.loss_kind) << " exceeds tolerance (max_rel_error "
                        << r.max_rel_error << ")\n";
                }
            }
            return passed ? kExitOk : kExitRuntime;
        } else if (*gen_cmd) {
            auto config = load_config(gen_opts);
            if (!gen_opts.seeds.empty()) {
                config.data.seed = gen_opts.seeds.front();
            }
            if (gen_n_positive) {
                config.data.n_positive = *gen_n_positive;
            }
            if (gen_easy_fraction) {
                config.data.easy_negative_fraction = *gen_easy_fraction;
            }
            if (gen_target_fraction) {
                config.transform.target_fraction_positive = *gen_target_fraction;
            }
            try {
                config.data.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            TransformSpec tspec = config.transform;
            tspec.seed = config.data.seed;
            std::ostringstream ss;
            write_csv(ss, transform(generate(config.data), tspec));
            emit(gen_opts.out, ss.str(), out);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace imbalance::cli

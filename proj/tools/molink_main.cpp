#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "molink/config.hpp"
#include "molink/errors.hpp"
#include "molink/harness.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_path;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "experiment config file")->required();
    sub->add_option("--set", args.overrides, "override a config key (key=value)");
    sub->add_option("--seed", args.seed, "override the config seed")
        ->each([&args](const std::string&) { args.seed_given = true; });
    sub->add_option("--out", args.out_path, "output CSV path (default: stdout)");
}

molink::config::KeyValues load_values(const CommonArgs& args) {
    auto kv = molink::config::KeyValues::from_file(args.config_path);
    for (const auto& assignment : args.overrides)
        molink::config::apply_override(kv, assignment);
    if (args.seed_given) kv.set("seed", std::to_string(args.seed));
    return kv;
}

void write_output(const std::string& csv, const std::string& path) {
    if (path.empty()) {
        std::cout << csv;
        if (!std::cout) throw std::runtime_error("failed writing to stdout");
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << csv;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"molecular link simulator"};
    app.require_subcommand(1);

    CommonArgs taps_args;
    CLI::App* taps = app.add_subcommand("taps", "export channel taps");
    add_common(taps, taps_args);

    CommonArgs ber_args;
    CLI::App* ber = app.add_subcommand("ber", "bit error rate sweep");
    add_common(ber, ber_args);

    CommonArgs quant_args;
    CLI::App* quant = app.add_subcommand("quantizer", "quantized precoder sweep");
    add_common(quant, quant_args);

    CommonArgs mismatch_args;
    CLI::App* mismatch = app.add_subcommand("mismatch", "diffusion mismatch study");
    add_common(mismatch, mismatch_args);

    CommonArgs reaction_args;
    std::string trace_out;
    CLI::App* reaction = app.add_subcommand("reaction", "slow-reaction receiver study");
    add_common(reaction, reaction_args);
    reaction->add_option("--trace-out", trace_out,
                         "also export a two-release concentration trace CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (taps->parsed()) {
            auto kv = load_values(taps_args);
            auto cfg = molink::config::build_taps_config(kv);
            write_output(molink::harness::to_csv(molink::harness::run_taps(cfg)),
                         taps_args.out_path);
        } else if (ber->parsed()) {
            auto kv = load_values(ber_args);
            auto cfg = molink::config::build_ber_config(kv);
            write_output(molink::harness::to_csv(molink::harness::run_ber(cfg)),
                         ber_args.out_path);
        } else if (quant->parsed()) {
            auto kv = load_values(quant_args);
            auto cfg = molink::config::build_quantizer_config(kv);
            write_output(molink::harness::to_csv(molink::harness::run_quantizer(cfg)),
                         quant_args.out_path);
        } else if (mismatch->parsed()) {
            auto kv = load_values(mismatch_args);
            auto cfg = molink::config::build_mismatch_config(kv);
            write_output(molink::harness::to_csv(molink::harness::run_mismatch(cfg)),
                         mismatch_args.out_path);
        } else if (reaction->parsed()) {
            auto kv = load_values(reaction_args);
            auto cfg = molink::config::build_reaction_config(kv);
            write_output(molink::harness::to_csv(molink::harness::run_reaction(cfg)),
                         reaction_args.out_path);
            if (!trace_out.empty())
                write_output(molink::harness::to_csv(molink::harness::run_reaction_trace(cfg)),
                             trace_out);
        }
    } catch (const molink::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const molink::ContractViolation& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const molink::NumericsError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const molink::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

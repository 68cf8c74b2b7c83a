#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "lmpkit/errors.hpp"

namespace {

int fail(const std::string& kind, const std::string& message, const std::string& pointer, int code) {
    nlohmann::json err{{"kind", kind}, {"message", message}};
    if (!pointer.empty()) err["pointer"] = pointer;
    std::cerr << nlohmann::json{{"error", err}}.dump() << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace lmpkit::app;
    CLI::App app{"lmpkit: leaky max pooling keypoint experiments"};
    app.require_subcommand(1);

    CommonArgs common;
    std::filesystem::path out, checkpoint;
    std::vector<std::filesystem::path> checkpoints;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", common.config, "experiment JSON")->check(CLI::ExistingFile);
        sub->add_option("--set", common.overrides, "override a config key, e.g. train.epochs=3");
        sub->add_option("--data", common.data, "dataset directory written by `gen`");
    };

    auto* gen = app.add_subcommand("gen", "materialise the synthetic dataset");
    add_common(gen);
    gen->add_option("-o,--out", out, "dataset directory (default <output_dir>/data)");

    auto* tr = app.add_subcommand("train", "train primary (+ replica), write checkpoint and history.csv");
    add_common(tr);

    auto* ev = app.add_subcommand("eval", "keypoint prediction + greedy PCK on the test split");
    add_common(ev);
    ev->add_option("--checkpoint", checkpoint, "checkpoint directory (default <output_dir>/checkpoint)");

    auto* en = app.add_subcommand("entropy", "feature-map entropy per checkpoint");
    add_common(en);
    en->add_option("--checkpoint", checkpoints, "checkpoint directory, repeatable")->required();

    app.add_subcommand("pooldemo", "dense/sparse 2x2 pooling table");

    auto* fl = app.add_subcommand("flops", "multiply-add counts of the model");
    add_common(fl);
    fl->add_option("--checkpoint", checkpoint, "take the architecture from a checkpoint");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("UsageError", e.what(), "", 2);
    }

    try {
        if (*gen) cmd_gen(common, out, std::cout);
        else if (*tr) cmd_train(common, std::cout);
        else if (*ev) cmd_eval(common, checkpoint, std::cout);
        else if (*en) cmd_entropy(common, checkpoints, std::cout);
        else if (app.got_subcommand("pooldemo")) cmd_pooldemo(std::cout);
        else if (*fl) cmd_flops(common, checkpoint, std::cout);
    } catch (const lmpkit::ConfigError& e) {
        return fail(e.kind(), e.what(), e.pointer().empty() ? "/" : e.pointer(), 2);
    } catch (const lmpkit::IoError& e) {
        return fail(e.kind(), e.what(), "", 3);
    } catch (const lmpkit::Error& e) {
        return fail(e.kind(), e.what(), "", 1);
    } catch (const std::exception& e) {
        return fail("InternalError", e.what(), "", 1);
    }
    return 0;
}

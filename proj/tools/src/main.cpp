#include "commands.hpp"
#include "common.hpp"
#include "wsmn/pipeline.hpp"

#include <iostream>
#include <vector>

int main(int argc, char** argv) {
    using namespace wsmn::cli;
    CLI::App app{"Texture-adaptive shearlet watermarking: embed, verify, attack, optimize, bench"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    std::vector<Command> commands{add_embed(app),    add_verify(app), add_attack(app),
                                  add_optimize(app), add_bench(app),  add_fetch_dataset(app)};
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        for (auto& [sub, run] : commands)
            if (sub->parsed()) return run();
    } catch (const wsmn::MissingMetadata& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const wsmn::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

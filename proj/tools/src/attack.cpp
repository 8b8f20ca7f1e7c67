#include "commands.hpp"
#include "common.hpp"
#include "wsmn/attacks.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace wsmn::cli {

namespace {

struct AttackOptions {
    std::string input, out_dir, batch;
    std::vector<std::string> specs;
};

int run_attack(const AttackOptions& o) {
    const Image img = load_image(o.input);
    AttackBatch batch;
    if (!o.batch.empty()) {
        std::ifstream in(o.batch);
        if (!in) throw InputError("cannot open batch file " + o.batch);
        batch = parse_attack_batch(in);
    }
    for (const auto& s : o.specs) {
        std::istringstream line(s);
        AttackBatch one = parse_attack_batch(line);
        batch.specs.insert(batch.specs.end(), one.specs.begin(), one.specs.end());
        for (auto& e : one.errors) batch.errors.push_back("--spec '" + s + "': " + e.substr(e.find(':') + 2));
    }
    if (batch.specs.empty() && batch.errors.empty()) throw InputError("no attacks given (use --batch or --spec)");

    const fs::path dir(o.out_dir);
    const std::string stem = fs::path(o.input).stem().string();
    Json outputs = Json::array();
    for (const auto& spec : batch.specs) {
        const fs::path out = dir / (stem + "__" + spec.label() + ".png");
        save_image(apply_attack(img, spec), out);
        outputs.push_back({{"spec", spec.to_line()}, {"output", out.string()}});
    }
    for (const auto& e : batch.errors) std::cerr << "rejected " << e << "\n";
    Json report{{"tool", tool_info("attack")}, {"inputs", {{"image", file_info(o.input)}}}, {"outputs", outputs},
                {"rejected", batch.errors}};
    if (!o.batch.empty()) report["inputs"]["batch"] = file_info(o.batch);
    write_json(report, dir / (stem + "__attacks.json"));
    std::cout << outputs.size() << " attacked images written, " << batch.errors.size() << " specs rejected\n";
    return batch.errors.empty() ? 0 : 2;
}

} // namespace

Command add_attack(CLI::App& app) {
    auto o = std::make_shared<AttackOptions>();
    CLI::App* sub = app.add_subcommand("attack", "Apply a batch of attacks");
    sub->add_option("-i,--input", o->input, "Image to attack")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out-dir", o->out_dir, "Output directory")->required();
    sub->add_option("--batch", o->batch, "File with one attack spec per line: kind key=value ... [seed=N]");
    sub->add_option("--spec", o->specs, "A single attack spec (repeatable)");
    return {sub, [o] { return run_attack(*o); }};
}

} // namespace wsmn::cli

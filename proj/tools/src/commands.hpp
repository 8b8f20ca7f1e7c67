#pragma once

#include <CLI11.hpp>

#include <functional>
#include <utility>

namespace wsmn::cli {

using Command = std::pair<CLI::App*, std::function<int()>>;

Command add_embed(CLI::App& app);
Command add_verify(CLI::App& app);
Command add_attack(CLI::App& app);
Command add_optimize(CLI::App& app);
Command add_bench(CLI::App& app);
Command add_fetch_dataset(CLI::App& app);

} // namespace wsmn::cli

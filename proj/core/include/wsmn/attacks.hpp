#pragma once

#include "wsmn/image.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace wsmn {

enum class AttackKind {
    SaltPepper,
    Speckle,
    GaussianNoise,
    Jpeg,
    Lighten,
    Darken,
    Sharpen,
    GaussianFilter,
    Average,
    Median,
    Resize,
    HistEq,
    Lsb,
    Wiener,
    Crop,
};

std::string to_string(AttackKind k);
AttackKind parse_attack_kind(const std::string& name);
bool is_stochastic(AttackKind k);

struct AttackSpec {
    AttackKind kind = AttackKind::Jpeg;
    std::map<std::string, double> params; // missing keys take the kind's default
    std::uint64_t seed = 0;

    double param(const std::string& key) const;
    // Throws InputError when a parameter is unknown or out of range.
    void validate() const;
    // Filename-safe tag: kind, sorted parameters and, for noisy kinds, the seed.
    std::string label() const;
    // Round-trips through parse_attack.
    std::string to_line() const;
};

// One spec per line: `kind key=value ... [seed=N]`; blank lines and '#' comments are skipped.
AttackSpec parse_attack(const std::string& line);

struct AttackBatch {
    std::vector<AttackSpec> specs;
    std::vector<std::string> errors; // "line N: message" for rejected entries
};
AttackBatch parse_attack_batch(std::istream& in);

Image apply_attack(const Image& img, const AttackSpec& spec);
Image apply_attacks(const Image& img, const std::vector<AttackSpec>& chain);

// Sharpen(r=1, amount=4), Wiener 4x4, resize down-up by 1/2, darken 50, histogram equalisation.
std::vector<AttackSpec> optimization_attack_set();
// Ten strengths per parameterised kind plus the fixed filters, for benchmark curves.
std::vector<AttackSpec> robustness_grid(std::uint64_t seed);

} // namespace wsmn

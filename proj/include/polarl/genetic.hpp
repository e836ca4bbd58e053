#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "polarl/codec.hpp"
#include "polarl/evaluator.hpp"
#include "polarl/rng.hpp"

namespace polarl {

struct GaConfig {
    int population_size = 32;
    int generations = 50;
    int mutation_swaps = 1;
    double crossover_rate = 0.9;
    int elitism_count = 4;
    bool seed_with_dega = false;  // keep the default free of expert knowledge
    RewardSpec fitness_spec;      // fitness = reward under this spec
};

struct GaMember {
    Construction construction;
    double fitness = 0.0;
};

/// Members sorted descending by fitness; all share (N, K).
struct GaPopulation {
    std::vector<GaMember> members;
    int generation = 0;

    const GaMember& best() const { return members.front(); }
};

using FitnessFn = std::function<double(const Construction&)>;

/// Evolve a population of (N,K) masks. Slot i breeds from sorted member i
/// and a tournament-picked partner (uniform crossover, popcount repair,
/// frozen/unfrozen swap mutations); the top elitism_count slots are copied
/// unchanged, so best fitness never decreases. With crossover and mutation
/// disabled every generation is a pure elitist copy.
GaPopulation ga_evolve(int n_bits, int info_len, const GaConfig& cfg,
                       const FitnessFn& fitness, RngStream& rng);

/// Force popcount(mask) == N-K by flipping random entries, touching
/// positions outside `protected_positions` (e.g. loci both parents agreed
/// on) only when nothing else is left.
Construction repair_mask(BitVec mask, int info_len, RngStream& rng,
                         const BitVec* protected_positions = nullptr);

// population archive: one line per member, "K=<int> fitness=<real> mask=<hex>"
std::string mask_to_hex(const BitVec& mask);
BitVec mask_from_hex(const std::string& hex, int n_bits);
void write_population_archive(std::ostream& os, const std::map<int, GaPopulation>& by_info_len);
std::map<int, GaPopulation> read_population_archive(std::istream& is, int n_bits);
void save_population_archive(const std::string& path,
                             const std::map<int, GaPopulation>& by_info_len);
std::map<int, GaPopulation> load_population_archive(const std::string& path, int n_bits);

}  // namespace polarl

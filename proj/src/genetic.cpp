#include "polarl/genetic.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "polarl/construction.hpp"

namespace polarl {

namespace {

BitVec random_mask(int n_bits, int frozen_count, RngStream& rng) {
    // sample a uniform frozen set via partial Fisher-Yates
    std::vector<int> idx(n_bits);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < frozen_count; ++i) {
        const int j = i + static_cast<int>(rng.uniform_below(n_bits - i));
        std::swap(idx[i], idx[j]);
    }
    BitVec mask(n_bits, 0);
    for (int i = 0; i < frozen_count; ++i) mask[idx[i]] = 1;
    return mask;
}

void sort_by_fitness(std::vector<GaMember>& members) {
    std::stable_sort(members.begin(), members.end(),
                     [](const GaMember& a, const GaMember& b) { return a.fitness > b.fitness; });
}

int popcount(const BitVec& mask) {
    return static_cast<int>(std::count(mask.begin(), mask.end(), 1));
}

}  // namespace

Construction repair_mask(BitVec mask, int info_len, RngStream& rng,
                         const BitVec* protected_positions) {
    const int n = static_cast<int>(mask.size());
    const int want = n - info_len;
    if (info_len < 0 || info_len > n) {
        throw std::invalid_argument("repair_mask: K out of range");
    }
    auto flip_candidates = [&](std::uint8_t from, bool include_protected) {
        std::vector<int> out;
        for (int i = 0; i < n; ++i) {
            if (mask[i] != from) continue;
            const bool prot = protected_positions && (*protected_positions)[i];
            if (prot != include_protected) continue;
            out.push_back(i);
        }
        return out;
    };
    auto adjust = [&](std::uint8_t from, std::uint8_t to, int count) {
        for (bool protected_pass : {false, true}) {
            auto cand = flip_candidates(from, protected_pass);
            while (count > 0 && !cand.empty()) {
                const std::size_t pick = rng.uniform_below(cand.size());
                mask[cand[pick]] = to;
                cand[pick] = cand.back();
                cand.pop_back();
                --count;
            }
            if (count == 0) break;
        }
    };
    const int have = popcount(mask);
    if (have > want) {
        adjust(1, 0, have - want);
    } else if (have < want) {
        adjust(0, 1, want - have);
    }
    return Construction(n, std::move(mask));
}

GaPopulation ga_evolve(int n_bits, int info_len, const GaConfig& cfg,
                       const FitnessFn& fitness, RngStream& rng) {
    if (info_len < 1 || info_len > n_bits - 1) {
        throw std::invalid_argument("ga_evolve: need 1 <= K <= N-1");
    }
    if (cfg.population_size < 2) throw std::invalid_argument("ga_evolve: population_size >= 2");
    if (cfg.elitism_count < 0 || cfg.elitism_count >= cfg.population_size) {
        throw std::invalid_argument("ga_evolve: elitism_count must be < population_size");
    }
    const int frozen = n_bits - info_len;

    GaPopulation pop;
    pop.members.reserve(cfg.population_size);
    for (int i = 0; i < cfg.population_size; ++i) {
        Construction c = (i == 0 && cfg.seed_with_dega)
                             ? dega_construct(n_bits, info_len,
                                              cfg.fitness_spec.channel.esn0_db)
                             : Construction(n_bits, random_mask(n_bits, frozen, rng));
        pop.members.push_back({std::move(c), 0.0});
    }
    for (auto& m : pop.members) m.fitness = fitness(m.construction);
    sort_by_fitness(pop.members);

    auto tournament = [&]() -> const GaMember& {
        const std::size_t a = rng.uniform_below(pop.members.size());
        const std::size_t b = rng.uniform_below(pop.members.size());
        return pop.members[a].fitness >= pop.members[b].fitness ? pop.members[a]
                                                                : pop.members[b];
    };

    for (int gen = 0; gen < cfg.generations; ++gen) {
        std::vector<GaMember> next;
        next.reserve(pop.members.size());
        for (int i = 0; i < cfg.elitism_count; ++i) next.push_back(pop.members[i]);
        for (int i = cfg.elitism_count; i < cfg.population_size; ++i) {
            const GaMember& a = pop.members[i];
            GaMember child = a;
            if (cfg.crossover_rate > 0.0 && rng.uniform() < cfg.crossover_rate) {
                const GaMember& b = tournament();
                BitVec mask(n_bits);
                BitVec agreed(n_bits);
                for (int j = 0; j < n_bits; ++j) {
                    const auto ma = a.construction.mask[j];
                    const auto mb = b.construction.mask[j];
                    agreed[j] = static_cast<std::uint8_t>(ma == mb);
                    mask[j] = agreed[j] ? ma
                                        : static_cast<std::uint8_t>(
                                              rng.uniform() < 0.5 ? ma : mb);
                }
                child.construction = repair_mask(std::move(mask), info_len, rng, &agreed);
            }
            for (int s = 0; s < cfg.mutation_swaps; ++s) {
                std::vector<int> ones, zeros;
                for (int j = 0; j < n_bits; ++j) {
                    (child.construction.mask[j] ? ones : zeros).push_back(j);
                }
                const int f = ones[rng.uniform_below(ones.size())];
                const int u = zeros[rng.uniform_below(zeros.size())];
                child.construction.mask[f] = 0;
                child.construction.mask[u] = 1;
            }
            child.fitness = fitness(child.construction);
            next.push_back(std::move(child));
        }
        pop.members = std::move(next);
        sort_by_fitness(pop.members);
        pop.generation = gen + 1;
    }
    return pop;
}

std::string mask_to_hex(const BitVec& mask) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve((mask.size() + 3) / 4);
    for (std::size_t i = 0; i < mask.size(); i += 4) {
        int nib = 0;
        for (std::size_t b = 0; b < 4 && i + b < mask.size(); ++b) {
            nib |= mask[i + b] << (3 - b);
        }
        out.push_back(digits[nib]);
    }
    return out;
}

BitVec mask_from_hex(const std::string& hex, int n_bits) {
    if (static_cast<int>(hex.size()) * 4 < n_bits) {
        throw std::invalid_argument("mask_from_hex: hex too short");
    }
    BitVec mask(n_bits, 0);
    for (int i = 0; i < n_bits; ++i) {
        const char c = hex[i / 4];
        int nib;
        if (c >= '0' && c <= '9') nib = c - '0';
        else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') nib = c - 'A' + 10;
        else throw std::invalid_argument("mask_from_hex: bad digit");
        mask[i] = static_cast<std::uint8_t>((nib >> (3 - i % 4)) & 1);
    }
    return mask;
}

void write_population_archive(std::ostream& os, const std::map<int, GaPopulation>& by_info_len) {
    os.precision(17);
    for (const auto& [k, pop] : by_info_len) {
        for (const auto& m : pop.members) {
            os << "K=" << k << " fitness=" << m.fitness << " mask="
               << mask_to_hex(m.construction.mask) << "\n";
        }
    }
}

std::map<int, GaPopulation> read_population_archive(std::istream& is, int n_bits) {
    std::map<int, GaPopulation> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        int k;
        double fit;
        char maskbuf[1024];
        if (std::sscanf(line.c_str(), "K=%d fitness=%lf mask=%1023s", &k, &fit, maskbuf) != 3) {
            throw std::runtime_error("population archive: bad line: " + line);
        }
        GaMember m;
        m.construction = Construction(n_bits, mask_from_hex(maskbuf, n_bits));
        m.fitness = fit;
        if (m.construction.info_length() != k) {
            throw std::runtime_error("population archive: K does not match mask popcount");
        }
        out[k].members.push_back(std::move(m));
    }
    return out;
}

void save_population_archive(const std::string& path,
                             const std::map<int, GaPopulation>& by_info_len) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    write_population_archive(f, by_info_len);
}

std::map<int, GaPopulation> load_population_archive(const std::string& path, int n_bits) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return read_population_archive(f, n_bits);
}

}  // namespace polarl

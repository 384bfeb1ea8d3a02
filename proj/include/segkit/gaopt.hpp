#ifndef SEGKIT_GAOPT_HPP
#define SEGKIT_GAOPT_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "segkit/cluster.hpp"
#include "segkit/matrix.hpp"
#include "segkit/rng.hpp"

/**
 * @file gaopt.hpp
 * @brief Elitist genetic algorithm over distance weights. An individual's
 * fitness is the inverse Davies-Bouldin index of the k-means clustering its
 * weights induce.
 */

namespace segkit {

struct GaConfig {
    std::size_t population = 52;
    std::size_t generations = 30;
    std::size_t tournament_size = 3;
    double crossover_prob = 0.7;
    double blend_alpha = 0.5;
    double mutation_sigma = 0.2;
    double gene_mutation_prob = 0.2;
    std::size_t elites = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Individual {
    std::vector<double> genome;
    /// Unset until evaluated.
    std::optional<double> fitness;
};

using Population = std::vector<Individual>;

struct GenerationStats {
    std::size_t generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    std::vector<double> best_genome;
};

/// One entry per evaluated population; entry 0 is the initial population.
struct GaTrace {
    std::vector<GenerationStats> generations;
};

struct GaResult {
    WeightVector best;
    double best_fitness = 0.0;
    GaTrace trace;
};

/// Clamp negatives to zero and divide by the sum; an all-zero genome becomes uniform.
WeightVector repair(std::span<const double> genome);

/**
 * `cfg.population` individuals. If given, `seed_individual` sits in slot 0
 * unchanged; every other genome is uniform on [0,1]^d, then repaired.
 */
Population init_population(std::size_t d, const std::optional<WeightVector>& seed_individual, const GaConfig& cfg);

/// 1 / DB of kmeans_fit(x, w, kmeans); 0 if DB is infinite, capped at 1e12 when DB < 1e-12.
double evaluate_fitness(const WeightVector& w, const FeatureMatrix& x, std::size_t k, const KMeansConfig& kmeans);
/// The DB-to-fitness mapping used by evaluate_fitness.
double fitness_from_db(double db);

/// Best of `tournament_size` uniform draws with replacement; ties keep the first drawn.
const Individual& tournament_select(const Population& population, const GaConfig& cfg, Rng& rng);

/// Child genes for one blend draw: gamma = (1 + 2 alpha) u - alpha.
std::pair<double, double> blend_genes(double a, double b, double u, double alpha);

/// With probability crossover_prob, blend each gene pair; otherwise return copies. Children are repaired.
std::pair<std::vector<double>, std::vector<double>> blend_crossover(std::span<const double> p1, std::span<const double> p2,
                                                                    const GaConfig& cfg, Rng& rng);

/// Each gene gets N(0, sigma^2) noise with probability gene_mutation_prob; the result is repaired.
std::vector<double> gaussian_mutate(std::span<const double> genome, const GaConfig& cfg, Rng& rng);

/**
 * Generational loop: evaluate, record, carry the top `elites` over unchanged
 * (with their fitness), fill the rest by tournament, crossover and mutation.
 * Evaluations within a generation run in parallel; each uses k-means seed
 * derive_seed(kmeans.seed, generation, slot), so results do not depend on
 * scheduling. Returns the best individual ever evaluated.
 */
GaResult run_ga(const FeatureMatrix& x, std::size_t k, const std::optional<WeightVector>& seed_individual,
                const GaConfig& cfg, const KMeansConfig& kmeans);

/// CSV with header `generation,best,mean`, one line per trace entry.
std::string trace_to_csv(const GaTrace& trace);

/// `{"spec_version", "weights": {feature: weight}, "fitness"}`; throws ContractError if names and weights differ in length.
nlohmann::json weights_to_json(const WeightVector& w, const std::vector<std::string>& feature_names, double fitness);

} // namespace segkit

#endif

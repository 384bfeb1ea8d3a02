#include "segkit/gaopt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "segkit/dataset.hpp"
#include "segkit/error.hpp"

namespace segkit {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kBreedStream = 2;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::vector<double> repaired(std::span<const double> genome) {
    const WeightVector w = repair(genome);
    return {w.values().begin(), w.values().end()};
}

} // namespace

void GaConfig::validate() const {
    if (population < 2) {
        throw ContractError("GA population must be at least 2");
    }
    if (tournament_size < 1) {
        throw ContractError("GA tournament size must be at least 1");
    }
    if (!is_probability(crossover_prob) || !is_probability(gene_mutation_prob)) {
        throw ContractError("GA probabilities must lie in [0, 1]");
    }
    if (!(blend_alpha >= 0.0) || !(mutation_sigma >= 0.0)) {
        throw ContractError("GA alpha and sigma must be non-negative");
    }
    if (elites >= population) {
        throw ContractError("GA elites must be fewer than the population");
    }
}

WeightVector repair(std::span<const double> genome) {
    if (genome.empty()) {
        throw ContractError("cannot repair an empty genome");
    }
    std::vector<double> w(genome.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < genome.size(); ++i) {
        w[i] = std::isfinite(genome[i]) ? std::max(0.0, genome[i]) : 0.0;
        sum += w[i];
    }
    if (!(sum > 0.0)) {
        return WeightVector::uniform(genome.size());
    }
    for (double& v : w) {
        v /= sum;
    }
    return WeightVector(std::move(w));
}

Population init_population(std::size_t d, const std::optional<WeightVector>& seed_individual, const GaConfig& cfg) {
    cfg.validate();
    if (d < 1) {
        throw ContractError("GA needs at least one dimension");
    }
    if (seed_individual && seed_individual->size() != d) {
        throw ContractError("seed individual has the wrong dimension");
    }
    Rng rng(derive_seed(cfg.seed, kInitStream));
    Population pop(cfg.population);
    for (std::size_t i = 0; i < cfg.population; ++i) {
        if (i == 0 && seed_individual) {
            auto v = seed_individual->values();
            pop[i].genome.assign(v.begin(), v.end());
            continue;
        }
        std::vector<double> g(d);
        for (double& v : g) {
            v = uniform01(rng);
        }
        pop[i].genome = repaired(g);
    }
    return pop;
}

double fitness_from_db(double db) {
    if (!std::isfinite(db)) {
        return 0.0;
    }
    if (db < 1e-12) {
        return 1e12;
    }
    return 1.0 / db;
}

double evaluate_fitness(const WeightVector& w, const FeatureMatrix& x, std::size_t k, const KMeansConfig& kmeans) {
    KMeansConfig cfg = kmeans;
    cfg.k = k;
    const ClusteringModel model = kmeans_fit(x, w, cfg);
    if (!model.db_score) {
        return 0.0; // k = 1 has no Davies-Bouldin index
    }
    return fitness_from_db(*model.db_score);
}

const Individual& tournament_select(const Population& population, const GaConfig& cfg, Rng& rng) {
    if (population.empty()) {
        throw ContractError("tournament over an empty population");
    }
    const Individual* winner = nullptr;
    for (std::size_t t = 0; t < cfg.tournament_size; ++t) {
        const Individual& cand = population[uniform_index(rng, population.size())];
        if (!winner || cand.fitness.value_or(0.0) > winner->fitness.value_or(0.0)) {
            winner = &cand;
        }
    }
    return *winner;
}

std::pair<double, double> blend_genes(double a, double b, double u, double alpha) {
    const double gamma = (1.0 + 2.0 * alpha) * u - alpha;
    return {(1.0 - gamma) * a + gamma * b, gamma * a + (1.0 - gamma) * b};
}

std::pair<std::vector<double>, std::vector<double>> blend_crossover(std::span<const double> p1, std::span<const double> p2,
                                                                    const GaConfig& cfg, Rng& rng) {
    if (p1.size() != p2.size()) {
        throw ContractError("crossover parents differ in dimension");
    }
    std::vector<double> c1(p1.begin(), p1.end());
    std::vector<double> c2(p2.begin(), p2.end());
    if (uniform01(rng) < cfg.crossover_prob) {
        for (std::size_t i = 0; i < c1.size(); ++i) {
            std::tie(c1[i], c2[i]) = blend_genes(p1[i], p2[i], uniform01(rng), cfg.blend_alpha);
        }
        c1 = repaired(c1);
        c2 = repaired(c2);
    }
    return {std::move(c1), std::move(c2)};
}

std::vector<double> gaussian_mutate(std::span<const double> genome, const GaConfig& cfg, Rng& rng) {
    std::vector<double> out(genome.begin(), genome.end());
    std::normal_distribution<double> noise(0.0, cfg.mutation_sigma > 0.0 ? cfg.mutation_sigma : 1.0);
    for (double& g : out) {
        if (uniform01(rng) < cfg.gene_mutation_prob) {
            const double z = noise(rng);
            g += cfg.mutation_sigma > 0.0 ? z : 0.0;
        }
    }
    return repaired(out);
}

namespace {

void evaluate(Population& pop, const FeatureMatrix& x, std::size_t k, const KMeansConfig& kmeans, std::size_t generation) {
    const auto n = static_cast<std::ptrdiff_t>(pop.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        Individual& ind = pop[static_cast<std::size_t>(i)];
        if (ind.fitness) {
            continue;
        }
        KMeansConfig cfg = kmeans;
        cfg.seed = derive_seed(kmeans.seed, generation, static_cast<std::uint64_t>(i));
        ind.fitness = evaluate_fitness(repair(ind.genome), x, k, cfg);
    }
}

// Indices ordered by descending fitness, ties by slot.
std::vector<std::size_t> ranking(const Population& pop) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return *pop[a].fitness > *pop[b].fitness; });
    return order;
}

GenerationStats summarize(const Population& pop, std::size_t generation) {
    const auto order = ranking(pop);
    GenerationStats s;
    s.generation = generation;
    s.best_fitness = *pop[order.front()].fitness;
    s.best_genome = pop[order.front()].genome;
    double sum = 0.0;
    for (const auto& ind : pop) {
        sum += *ind.fitness;
    }
    s.mean_fitness = sum / static_cast<double>(pop.size());
    return s;
}

} // namespace

GaResult run_ga(const FeatureMatrix& x, std::size_t k, const std::optional<WeightVector>& seed_individual,
                const GaConfig& cfg, const KMeansConfig& kmeans) {
    cfg.validate();
    if (x.rows() < k) {
        throw ContractError("GA needs at least k rows");
    }
    const std::size_t d = x.cols();
    Population pop = init_population(d, seed_individual, cfg);
    GaTrace trace;

    evaluate(pop, x, k, kmeans, 0);
    trace.generations.push_back(summarize(pop, 0));
    Individual best_ever{trace.generations.back().best_genome, trace.generations.back().best_fitness};

    Rng rng(derive_seed(cfg.seed, kBreedStream));
    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        const auto order = ranking(pop);
        Population next;
        next.reserve(cfg.population);
        for (std::size_t e = 0; e < cfg.elites; ++e) {
            next.push_back(pop[order[e]]);
        }
        while (next.size() < cfg.population) {
            const Individual& a = tournament_select(pop, cfg, rng);
            const Individual& b = tournament_select(pop, cfg, rng);
            auto [c1, c2] = blend_crossover(a.genome, b.genome, cfg, rng);
            next.push_back({gaussian_mutate(c1, cfg, rng), std::nullopt});
            if (next.size() < cfg.population) {
                next.push_back({gaussian_mutate(c2, cfg, rng), std::nullopt});
            }
        }
        pop = std::move(next);
        evaluate(pop, x, k, kmeans, gen);
        trace.generations.push_back(summarize(pop, gen));
        if (trace.generations.back().best_fitness > *best_ever.fitness) {
            best_ever = {trace.generations.back().best_genome, trace.generations.back().best_fitness};
        }
    }
    return {repair(best_ever.genome), *best_ever.fitness, std::move(trace)};
}

std::string trace_to_csv(const GaTrace& trace) {
    std::ostringstream out;
    out << "generation,best,mean\n";
    for (const auto& g : trace.generations) {
        out << g.generation << ',' << format_number(g.best_fitness) << ',' << format_number(g.mean_fitness) << '\n';
    }
    return out.str();
}

nlohmann::json weights_to_json(const WeightVector& w, const std::vector<std::string>& feature_names, double fitness) {
    if (w.size() != feature_names.size()) {
        throw ContractError("weight vector and feature names differ in length");
    }
    nlohmann::json weights = nlohmann::json::object();
    for (std::size_t i = 0; i < w.size(); ++i) {
        weights[feature_names[i]] = w[i];
    }
    return {{"spec_version", 1}, {"weights", weights}, {"fitness", fitness}};
}

} // namespace segkit

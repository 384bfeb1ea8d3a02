#include <omp.h>

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "segkit/error.hpp"
#include "segkit/gaopt.hpp"
#include "test_util.hpp"

using namespace segkit;

namespace {

void check_simplex(std::span<const double> g) {
    double sum = 0.0;
    for (double v : g) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
}

// Two informative columns carrying three groups, plus `noise` uniform columns.
FeatureMatrix planted(std::uint64_t seed, std::size_t n, std::size_t noise) {
    Rng rng(seed);
    std::normal_distribution<double> nd(0.0, 0.05);
    const double centres[3][2] = {{0.2, 0.2}, {0.8, 0.3}, {0.5, 0.8}};
    FeatureMatrix x(n, 2 + noise);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % 3;
        x(i, 0) = centres[c][0] + nd(rng);
        x(i, 1) = centres[c][1] + nd(rng);
        for (std::size_t j = 0; j < noise; ++j) {
            x(i, 2 + j) = uniform01(rng);
        }
    }
    return x;
}

GaConfig small_ga(std::uint64_t seed) {
    GaConfig cfg;
    cfg.population = 16;
    cfg.generations = 6;
    cfg.seed = seed;
    return cfg;
}

KMeansConfig quick_kmeans(std::uint64_t seed) {
    KMeansConfig k;
    k.n_init = 2;
    k.seed = seed;
    return k;
}

} // namespace

TEST_CASE("repair clamps and renormalizes") {
    const std::vector<double> g{-0.2, 0.5, 0.7};
    const WeightVector w = repair(g);
    CHECK(w[0] == 0.0);
    CHECK(w[1] == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
    CHECK(w[2] == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
    CHECK(repair(std::vector<double>{0, 0, 0}) == WeightVector::uniform(3));
    CHECK(repair(std::vector<double>{-1, -2}) == WeightVector::uniform(2));
    const std::vector<double> valid{0.25, 0.25, 0.5};
    CHECK(repair(valid) == WeightVector(valid));
}

TEST_CASE("initial population: size, seed slot, simplex, determinism") {
    GaConfig cfg;
    cfg.seed = 4;
    const Population plain = init_population(3, std::nullopt, cfg);
    CHECK(plain.size() == 52);
    for (const auto& ind : plain) {
        check_simplex(ind.genome);
        CHECK_FALSE(ind.fitness.has_value());
    }
    const Population seeded = init_population(3, WeightVector({0.6, 0.3, 0.1}), cfg);
    CHECK(seeded[0].genome == std::vector<double>{0.6, 0.3, 0.1});
    const Population again = init_population(3, std::nullopt, cfg);
    for (std::size_t i = 0; i < plain.size(); ++i) {
        CHECK(plain[i].genome == again[i].genome);
    }
    CHECK_THROWS_AS(init_population(0, std::nullopt, cfg), ContractError);
    CHECK_THROWS_AS(init_population(2, WeightVector({0.6, 0.3, 0.1}), cfg), ContractError);
}

TEST_CASE("config invariants") {
    GaConfig cfg;
    cfg.population = 1;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
    cfg = GaConfig{};
    cfg.crossover_prob = 1.2;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
    cfg = GaConfig{};
    cfg.gene_mutation_prob = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ContractError);
}

TEST_CASE("fitness is the inverse Davies-Bouldin index") {
    CHECK(fitness_from_db(0.5) == 2.0);
    CHECK(fitness_from_db(std::numeric_limits<double>::infinity()) == 0.0);
    CHECK(fitness_from_db(0.0) == 1e12);
    CHECK(fitness_from_db(1e-13) == 1e12);

    const FeatureMatrix x = planted(1, 300, 1);
    KMeansConfig k = quick_kmeans(3);
    k.k = 3;
    const WeightVector w({0.4, 0.4, 0.2});
    const double f = evaluate_fitness(w, x, 3, k);
    const ClusteringModel m = kmeans_fit(x, w, k);
    CHECK(f * *m.db_score == doctest::Approx(1.0).epsilon(1e-9));

    // Coincident centroids: two identical halves mirrored so every 2-clustering centres at the same point.
    const FeatureMatrix flat(2, 1, {0.0, 0.0});
    CHECK(evaluate_fitness(WeightVector::uniform(1), flat, 2, k) == 0.0);
}

TEST_CASE("informative weights beat uniform weights on a planted corpus") {
    const FeatureMatrix x = planted(2, 600, 1);
    const KMeansConfig k = quick_kmeans(5);
    const double oracle_fit = evaluate_fitness(WeightVector({0.5, 0.5, 0.0}), x, 3, k);
    const double uniform_fit = evaluate_fitness(WeightVector::uniform(3), x, 3, k);
    CHECK(oracle_fit > uniform_fit);
}

TEST_CASE("tournament selection") {
    Population pop(3);
    pop[0].fitness = 0.1;
    pop[1].fitness = 0.9;
    pop[2].fitness = 0.5;
    GaConfig cfg;
    cfg.tournament_size = 3;
    Rng rng(1);
    // Over many draws the winner is always the best candidate drawn; with size 3 and 3 members the best
    // is drawn often, and a non-best winner must not beat any drawn candidate.
    int wins_best = 0;
    for (int i = 0; i < 200; ++i) {
        const Individual& w = tournament_select(pop, cfg, rng);
        wins_best += *w.fitness == 0.9 ? 1 : 0;
    }
    CHECK(wins_best > 100);

    cfg.tournament_size = 50;
    CHECK(*tournament_select(pop, cfg, rng).fitness == 0.9);

    Population single(1);
    single[0].fitness = 0.3;
    CHECK(&tournament_select(single, cfg, rng) == &single[0]);

    Population equal(4);
    for (auto& ind : equal) {
        ind.fitness = 1.0;
    }
    cfg.tournament_size = 3;
    Rng a(77), b(77);
    const Individual& winner = tournament_select(equal, cfg, a);
    const std::size_t first_drawn = uniform_index(b, equal.size());
    CHECK(&winner == &equal[first_drawn]);
    CHECK_THROWS_AS(tournament_select(Population{}, cfg, a), ContractError);
}

TEST_CASE("blend genes at fixed draws") {
    const auto [c1, c2] = blend_genes(0.2, 0.6, 0.5, 0.5);
    CHECK(c1 == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(c2 == doctest::Approx(0.4).epsilon(1e-15));
    // u = 0 gives gamma = -alpha, u = 1 gives gamma = 1 + alpha: the alpha-extended interval.
    const auto [lo1, lo2] = blend_genes(0.2, 0.6, 0.0, 0.5);
    const auto [hi1, hi2] = blend_genes(0.2, 0.6, 1.0, 0.5);
    CHECK(lo1 == doctest::Approx(0.0));
    CHECK(lo2 == doctest::Approx(0.8));
    CHECK(hi1 == doctest::Approx(0.8));
    CHECK(hi2 == doctest::Approx(0.0));
}

TEST_CASE("blend crossover: probability, range, repair") {
    Rng rng(3);
    const std::vector<double> p1{0.2, 0.3, 0.5}, p2{0.6, 0.1, 0.3};
    GaConfig never;
    never.crossover_prob = 0.0;
    const auto [a, b] = blend_crossover(p1, p2, never, rng);
    CHECK(a == p1);
    CHECK(b == p2);

    GaConfig always;
    always.crossover_prob = 1.0;
    for (int i = 0; i < 500; ++i) {
        const auto [c1, c2] = blend_crossover(p1, p2, always, rng);
        check_simplex(c1);
        check_simplex(c2);
    }
    const std::vector<double> short_parent{0.5, 0.5};
    CHECK_THROWS_AS(blend_crossover(p1, short_parent, always, rng), ContractError);
}

TEST_CASE("gaussian mutation") {
    Rng rng(4);
    const std::vector<double> g{0.2, 0.3, 0.5};
    GaConfig off;
    off.gene_mutation_prob = 0.0;
    CHECK(gaussian_mutate(g, off, rng) == g);
    GaConfig quiet;
    quiet.mutation_sigma = 0.0;
    quiet.gene_mutation_prob = 1.0;
    CHECK(gaussian_mutate(g, quiet, rng) == g);
    GaConfig loud;
    loud.mutation_sigma = 2.0;
    loud.gene_mutation_prob = 1.0;
    for (int i = 0; i < 500; ++i) {
        check_simplex(gaussian_mutate(g, loud, rng));
    }
}

TEST_CASE("run_ga: elitism, determinism, zero generations") {
    const FeatureMatrix x = planted(6, 240, 2);
    const GaResult r = run_ga(x, 3, std::nullopt, small_ga(10), quick_kmeans(11));
    REQUIRE(r.trace.generations.size() == 7);
    for (std::size_t g = 1; g < r.trace.generations.size(); ++g) {
        CHECK(r.trace.generations[g].best_fitness >= r.trace.generations[g - 1].best_fitness);
        CHECK(r.trace.generations[g].mean_fitness <= r.trace.generations[g].best_fitness);
        CHECK(r.trace.generations[g].generation == g);
    }
    CHECK(r.best_fitness == r.trace.generations.back().best_fitness);
    check_simplex(r.best.values());

    const GaResult again = run_ga(x, 3, std::nullopt, small_ga(10), quick_kmeans(11));
    CHECK(again.best == r.best);
    CHECK(again.best_fitness == r.best_fitness);

    GaConfig zero = small_ga(10);
    zero.generations = 0;
    const GaResult z = run_ga(x, 3, std::nullopt, zero, quick_kmeans(11));
    CHECK(z.trace.generations.size() == 1);
    CHECK(z.best_fitness == r.trace.generations.front().best_fitness);
}

TEST_CASE("run_ga does not depend on the thread count") {
    const FeatureMatrix x = planted(7, 200, 1);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const GaResult one = run_ga(x, 3, std::nullopt, small_ga(3), quick_kmeans(4));
    omp_set_num_threads(3);
    const GaResult three = run_ga(x, 3, std::nullopt, small_ga(3), quick_kmeans(4));
    omp_set_num_threads(saved);
    CHECK(one.best == three.best);
    REQUIRE(one.trace.generations.size() == three.trace.generations.size());
    for (std::size_t g = 0; g < one.trace.generations.size(); ++g) {
        CHECK(one.trace.generations[g].best_fitness == three.trace.generations[g].best_fitness);
        CHECK(one.trace.generations[g].mean_fitness == three.trace.generations[g].mean_fitness);
    }
}

TEST_CASE("run_ga moves weight off noise columns") {
    const FeatureMatrix x = planted(8, 900, 3);
    GaConfig cfg;
    cfg.population = 24;
    cfg.generations = 10;
    cfg.seed = 12;
    const GaResult r = run_ga(x, 3, std::nullopt, cfg, quick_kmeans(13));
    CHECK(r.best[2] + r.best[3] + r.best[4] < 0.3);
}

TEST_CASE("trace and weights export") {
    GaTrace t;
    t.generations.push_back({0, 1.5, 1.0, {0.5, 0.5}});
    t.generations.push_back({1, 2.0, 1.25, {0.7, 0.3}});
    CHECK(trace_to_csv(t) == "generation,best,mean\n0,1.5,1\n1,2,1.25\n");
    const auto doc = weights_to_json(WeightVector({0.25, 0.75}), {"age", "weight"}, 2.0);
    CHECK(doc["weights"]["age"] == 0.25);
    CHECK(doc["fitness"] == 2.0);
    CHECK(doc["spec_version"] == 1);
    CHECK_THROWS_AS(weights_to_json(WeightVector({0.25, 0.75}), {"age"}, 2.0), ContractError);
}

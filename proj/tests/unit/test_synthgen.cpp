#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "segkit/eda.hpp"
#include "segkit/error.hpp"
#include "segkit/synthgen.hpp"
#include "test_util.hpp"

using namespace segkit;

namespace {

GeneratedColumn column(std::string name, double missing, double outlier = 0.0) {
    GeneratedColumn c;
    c.spec = testutil::cont(std::move(name));
    c.missing_rate = missing;
    c.outlier_rate = outlier;
    c.distribution.kind = DistributionKind::heavy_tail;
    c.distribution.location = 1.0;
    c.distribution.scale = 0.3;
    return c;
}

GeneratorSpec small_spec(std::size_t n) {
    GeneratorSpec spec;
    spec.n_rows = n;
    spec.seed = 99;
    spec.columns = {column("a", 0.5721), column("b", 0.0), column("c", 0.3078, 0.09)};
    GeneratedColumn g;
    g.spec = testutil::cat("g");
    g.missing_rate = 0.1;
    g.distribution.kind = DistributionKind::categorical;
    g.distribution.categories = {"x", "y", "z"};
    g.distribution.frequencies = {0.5, 0.3, 0.2};
    spec.columns.push_back(g);
    return spec;
}

double missing_fraction(const ColumnTable& t, std::size_t col) {
    auto m = t.missing(col);
    return static_cast<double>(std::count(m.begin(), m.end(), std::uint8_t{1})) / static_cast<double>(t.n_rows());
}

} // namespace

TEST_CASE("missing rates converge to their targets at 100k rows") {
    const ColumnTable t = generate_corpus(small_spec(100000));
    CHECK(std::abs(missing_fraction(t, 0) - 0.5721) <= 0.01);
    CHECK(std::abs(missing_fraction(t, 2) - 0.3078) <= 0.01);
    CHECK(std::abs(missing_fraction(t, 3) - 0.1) <= 0.01);
}

TEST_CASE("missing rate zero leaves the column fully available") {
    const ColumnTable t = generate_corpus(small_spec(5000));
    const Mask avail = availability_mask(t, "b");
    CHECK(std::all_of(avail.begin(), avail.end(), [](auto v) { return v == 1; }));
}

TEST_CASE("same seed gives byte-identical corpora, different seed does not") {
    auto spec = small_spec(3000);
    std::ostringstream a, b, c;
    write_csv(a, generate_corpus(spec));
    write_csv(b, generate_corpus(spec));
    spec.seed = 100;
    write_csv(c, generate_corpus(spec));
    CHECK(a.str() == b.str());
    CHECK(a.str() != c.str());
}

TEST_CASE("zero rows and bad rates are contract errors") {
    CHECK_THROWS_AS(generate_corpus(small_spec(0)), ContractError);
    auto spec = small_spec(10);
    spec.columns[0].missing_rate = 1.5;
    CHECK_THROWS_AS(generate_corpus(spec), ContractError);
}

TEST_CASE("outlier injection puts the configured mass beyond 3 sigma of the clean column") {
    auto spec = small_spec(50000);
    auto clean_spec = spec;
    clean_spec.columns[2].outlier_rate = 0.0;
    const ColumnTable dirty = generate_corpus(spec);
    const ColumnTable clean = generate_corpus(clean_spec);
    double mean = 0.0, sq = 0.0, n = 0.0;
    for (std::size_t r = 0; r < clean.n_rows(); ++r) {
        if (!clean.is_missing(2, r)) {
            const double v = *clean.number(2, r);
            mean += v;
            sq += v * v;
            n += 1.0;
        }
    }
    mean /= n;
    const double cut = mean + 3.0 * std::sqrt(sq / n - mean * mean);
    double beyond_dirty = 0.0, beyond_clean = 0.0;
    for (std::size_t r = 0; r < dirty.n_rows(); ++r) {
        CHECK(dirty.is_missing(2, r) == clean.is_missing(2, r));
        if (!dirty.is_missing(2, r)) {
            beyond_dirty += *dirty.number(2, r) > cut ? 1.0 : 0.0;
            beyond_clean += *clean.number(2, r) > cut ? 1.0 : 0.0;
        }
    }
    CHECK(beyond_dirty / n == doctest::Approx(0.09).epsilon(0.1));
    CHECK(beyond_clean / n < 0.01);
}

TEST_CASE("joint split patterns set region sizes and split missing rates") {
    GeneratorSpec spec;
    spec.n_rows = 100000;
    spec.seed = 5;
    auto s1 = column("s1", 0.0);
    auto s2 = column("s2", 0.0);
    s1.spec.split_variable = s2.spec.split_variable = true;
    spec.columns = {s1, s2, column("x", 0.0)};
    spec.split_patterns = {{"11", 0.5}, {"10", 0.3}, {"01", 0.15}, {"00", 0.05}};
    CHECK(spec.target_missing_rate(0) == doctest::Approx(0.2));
    CHECK(spec.target_missing_rate(1) == doctest::Approx(0.35));
    const SyntheticCorpus corpus = generate_corpus_with_truth(spec);
    std::map<std::string, double> freq;
    for (std::size_t r = 0; r < spec.n_rows; ++r) {
        std::string key;
        key += corpus.table.is_missing(0, r) ? '0' : '1';
        key += corpus.table.is_missing(1, r) ? '0' : '1';
        CHECK(key == corpus.pattern[r]);
        freq[key] += 1.0 / static_cast<double>(spec.n_rows);
    }
    CHECK(std::abs(freq["11"] - 0.5) < 0.01);
    CHECK(std::abs(freq["10"] - 0.3) < 0.01);
    CHECK(std::abs(freq["01"] - 0.15) < 0.01);
    CHECK(std::abs(freq["00"] - 0.05) < 0.01);
}

TEST_CASE("planted clusters separate along the generated columns") {
    GeneratorSpec spec;
    spec.n_rows = 3000;
    spec.seed = 8;
    for (const char* name : {"p", "q"}) {
        GeneratedColumn c = column(name, 0.0);
        c.distribution.kind = DistributionKind::bounded_normal;
        c.distribution.location = 0.0;
        c.distribution.scale = 1.0;
        c.separation = 6.0;
        spec.columns.push_back(c);
    }
    spec.default_clusters = 3;
    const SyntheticCorpus corpus = generate_corpus_with_truth(spec);
    // Per-cluster means of p are at least 3 units apart (centres are 6 units apart).
    std::vector<double> sum(3, 0.0), n(3, 0.0);
    for (std::size_t r = 0; r < spec.n_rows; ++r) {
        sum[corpus.cluster[r]] += *corpus.table.number(0, r);
        n[corpus.cluster[r]] += 1.0;
    }
    std::vector<double> means;
    for (int c = 0; c < 3; ++c) {
        REQUIRE(n[c] > 0);
        means.push_back(sum[c] / n[c]);
    }
    std::sort(means.begin(), means.end());
    CHECK(means[1] - means[0] > 3.0);
    CHECK(means[2] - means[1] > 3.0);
}

TEST_CASE("generator spec JSON") {
    const auto doc = nlohmann::json::parse(R"({
        "n_rows": 100, "seed": 3,
        "columns": [
            {"name": "s", "kind": "continuous", "split_variable": true, "distribution": {"type": "lognormal"}},
            {"name": "v", "kind": "categorical", "missing_rate": 0.2,
             "distribution": {"type": "categorical", "categories": ["a", "b"], "frequencies": [1, 1]}}
        ],
        "split_patterns": {"1": 0.7, "0": 0.3},
        "planted_clusters": {"default": 2, "by_pattern": {"1": 4}}
    })");
    const GeneratorSpec spec = generator_spec_from_json(doc);
    CHECK(spec.n_rows == 100);
    CHECK(spec.planted_clusters("1") == 4);
    CHECK(spec.planted_clusters("0") == 2);
    CHECK(spec.target_missing_rate(0) == doctest::Approx(0.3));

    auto bad = doc;
    bad["columns"][0]["missing_rate"] = 0.1;
    CHECK_THROWS_AS(generator_spec_from_json(bad), SchemaError);
    bad = doc;
    bad["columns"][1]["distribution"]["type"] = "heavy_tail";
    CHECK_THROWS_AS(generator_spec_from_json(bad), SchemaError);
}

TEST_CASE("demo generator calibrates the published missing rates") {
    const GeneratorSpec spec = load_generator_spec(SEGKIT_DEMO_DATA "/demo_generator.json");
    CHECK(spec.n_rows == 100000);
    const TableSchema schema = spec.schema();
    const std::map<std::string, double> published = {
        {"physical_access_count", 0.5721}, {"total_app_access_count", 0.3078}, {"reserved_activities", 0.6270},
        {"booked_reservations", 0.6342},   {"assigned_trainings", 0.5554},     {"validated_trainings", 0.7126},
        {"fitness_target", 0.5554},        {"weight", 0.6808}};
    for (const auto& [name, rate] : published) {
        CHECK(spec.target_missing_rate(schema.index_of(name)) == rate);
    }
    CHECK(schema.split_variables() == std::vector<std::string>{"favorite_activity", "avg_accesses", "avg_app_accesses"});
}

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <string>

#include "ebic/evolution.hpp"
#include "ebic/synthgen.hpp"

using namespace ebic;

namespace {

bool valid_population(const std::vector<ColumnSeries>& population, std::size_t n_cols) {
    return std::all_of(population.begin(), population.end(),
                       [&](const ColumnSeries& s) { return is_valid_series(s, n_cols); });
}

std::multiset<ColumnIndex> column_multiset(const ColumnSeries& s) {
    return {s.begin(), s.end()};
}

void check_top_rank_invariants(const TopRankList& list, const EvolutionConfig& cfg) {
    const auto& entries = list.entries();
    REQUIRE(entries.size() <= cfg.top_rank_capacity);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        REQUIRE(entries[i].fitness > 0.0);
        if (i > 0) {
            const bool ordered = entries[i - 1].fitness > entries[i].fitness ||
                                 (entries[i - 1].fitness == entries[i].fitness &&
                                  entries[i - 1].seq < entries[i].seq);
            REQUIRE(ordered);
        }
        for (std::size_t j = i + 1; j < entries.size(); ++j)
            REQUIRE(TopRankList::overlap(entries[i], entries[j]) <= cfg.overlap_threshold);
    }
}

}  // namespace

TEST_CASE("config validation rejects out-of-range fields") {
    EvolutionConfig ok;
    REQUIRE_NOTHROW(validate_config(ok));

    EvolutionConfig bad = ok;
    bad.population_size = 0;
    REQUIRE_THROWS_AS(validate_config(bad), std::invalid_argument);

    bad = ok;
    bad.elite_fraction = 0.0;
    REQUIRE_THROWS_AS(validate_config(bad), std::invalid_argument);

    bad = ok;
    bad.elite_fraction = 1.5;
    REQUIRE_THROWS_AS(validate_config(bad), std::invalid_argument);

    bad = ok;
    bad.overlap_threshold = 0.0;
    REQUIRE_THROWS_AS(validate_config(bad), std::invalid_argument);

    bad = ok;
    bad.penalty_base = 1.0;
    REQUIRE_THROWS_AS(validate_config(bad), std::invalid_argument);

    bad = ok;
    bad.probabilities.crossover += 0.1;
    REQUIRE_THROWS_AS(validate_config(bad), std::invalid_argument);

    bad = ok;
    bad.probabilities.insertion = -0.1;
    bad.probabilities.crossover += 0.4;
    REQUIRE_THROWS_AS(validate_config(bad), std::invalid_argument);
}

TEST_CASE("insertion grows a series by one unused column") {
    Rng rng(1);
    const ColumnSeries s{1, 4, 2};

    for (int i = 0; i < 2000; ++i) {
        const MutationResult r = mutate_insertion(s, 10, rng);
        REQUIRE(r.changed);
        REQUIRE(r.series.size() == s.size() + 1);
        REQUIRE(is_valid_series(r.series, 10));
        // The original order is preserved around the new column.
        ColumnSeries without = r.series;
        for (auto it = without.begin(); it != without.end(); ++it) {
            if (std::find(s.begin(), s.end(), *it) == s.end()) {
                without.erase(it);
                break;
            }
        }
        REQUIRE(without == s);
    }

    const ColumnSeries full{0, 1, 2};
    const MutationResult r = mutate_insertion(full, 3, rng);
    REQUIRE_FALSE(r.changed);
    REQUIRE(r.series == full);
}

TEST_CASE("deletion removes one column and respects the minimum length") {
    Rng rng(2);
    const ColumnSeries s{1, 4, 2};
    for (int i = 0; i < 2000; ++i) {
        const MutationResult r = mutate_deletion(s, rng);
        REQUIRE(r.changed);
        REQUIRE(r.series.size() == 2);
        REQUIRE(is_valid_series(r.series, 10));
        for (ColumnIndex c : r.series) REQUIRE(std::find(s.begin(), s.end(), c) != s.end());
    }

    const ColumnSeries minimal{4, 2};
    const MutationResult r = mutate_deletion(minimal, rng);
    REQUIRE_FALSE(r.changed);
    REQUIRE(r.series == minimal);
}

TEST_CASE("swap exchanges two positions and preserves the column set") {
    Rng rng(3);
    const ColumnSeries pair{4, 2};
    const MutationResult reversed = mutate_swap(pair, rng);
    REQUIRE(reversed.changed);
    REQUIRE(reversed.series == ColumnSeries{2, 4});

    ColumnSeries s{1, 4, 2, 9, 7};
    for (int i = 0; i < 2000; ++i) {
        const MutationResult r = mutate_swap(s, rng);
        REQUIRE(r.changed);
        REQUIRE(r.series != s);
        REQUIRE(column_multiset(r.series) == column_multiset(s));
        std::size_t differing = 0;
        for (std::size_t k = 0; k < s.size(); ++k) differing += r.series[k] != s[k];
        REQUIRE(differing == 2);
    }
}

TEST_CASE("substitution replaces one column with an unused one") {
    Rng rng(4);
    const ColumnSeries s{1, 4, 2};
    for (int i = 0; i < 2000; ++i) {
        const MutationResult r = mutate_substitution(s, 10, rng);
        REQUIRE(r.changed);
        REQUIRE(r.series.size() == s.size());
        REQUIRE(is_valid_series(r.series, 10));
        std::size_t differing = 0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (r.series[k] != s[k]) {
                ++differing;
                REQUIRE(std::find(s.begin(), s.end(), r.series[k]) == s.end());
            }
        }
        REQUIRE(differing == 1);
    }

    const ColumnSeries full{2, 0, 1};
    const MutationResult r = mutate_substitution(full, 3, rng);
    REQUIRE_FALSE(r.changed);
}

TEST_CASE("crossover keeps a prefix of the first parent and appends the second") {
    Rng rng(5);
    const ColumnSeries a{1, 4, 2};
    const ColumnSeries b{2, 3, 5};

    for (int i = 0; i < 2000; ++i) {
        const ColumnSeries child = crossover(a, b, 1.0, 2.0, rng);
        REQUIRE(is_valid_series(child, 10));
        std::set<ColumnIndex> allowed(a.begin(), a.end());
        allowed.insert(b.begin(), b.end());
        for (ColumnIndex c : child) REQUIRE(allowed.count(c) == 1);
        // Some prefix of the child is a prefix of a.
        REQUIRE(child.front() == a.front());
    }

    // Identical parents reproduce themselves regardless of the cut.
    for (int i = 0; i < 100; ++i) REQUIRE(crossover(a, a, 1.0, 1.0, rng) == a);

    // A full cut keeps all of a and appends the unused tail of b in order.
    Rng fixed(0);
    bool saw_full_merge = false;
    for (int i = 0; i < 200 && !saw_full_merge; ++i)
        saw_full_merge = crossover(a, b, 1.0, 2.0, fixed) == ColumnSeries{1, 4, 2, 3, 5};
    REQUIRE(saw_full_merge);
}

TEST_CASE("operator draws follow the configured probabilities") {
    Rng rng(6);
    OperatorProbabilities probs;  // defaults
    std::size_t counts[5] = {0, 0, 0, 0, 0};
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) counts[static_cast<int>(draw_operator(probs, rng))]++;
    REQUIRE_THAT(static_cast<double>(counts[0]) / trials, Catch::Matchers::WithinAbs(0.30, 0.01));
    REQUIRE_THAT(static_cast<double>(counts[1]) / trials, Catch::Matchers::WithinAbs(0.15, 0.01));
    REQUIRE_THAT(static_cast<double>(counts[2]) / trials, Catch::Matchers::WithinAbs(0.15, 0.01));
    REQUIRE_THAT(static_cast<double>(counts[3]) / trials, Catch::Matchers::WithinAbs(0.15, 0.01));
    REQUIRE_THAT(static_cast<double>(counts[4]) / trials, Catch::Matchers::WithinAbs(0.25, 0.01));
}

TEST_CASE("tabu list keys are the exact ordered sequence") {
    TabuList tabu(300);
    REQUIRE(tabu.insert(ColumnSeries{1, 2}));
    REQUIRE_FALSE(tabu.insert(ColumnSeries{1, 2}));
    REQUIRE(tabu.hits() == 1);
    REQUIRE(tabu.insert(ColumnSeries{2, 1}));  // different order, different key
    REQUIRE(tabu.insert(ColumnSeries{257, 2}));
    REQUIRE(tabu.contains(ColumnSeries{257, 2}));
    REQUIRE_FALSE(tabu.contains(ColumnSeries{2, 257}));
    REQUIRE(tabu.size() == 3);
    tabu.reset_hits();
    REQUIRE(tabu.hits() == 0);

    // Narrow packing must distinguish multi-byte patterns too.
    TabuList narrow(200);
    REQUIRE(narrow.insert(ColumnSeries{1, 2, 3}));
    REQUIRE(narrow.insert(ColumnSeries{1, 2}));
    REQUIRE(narrow.insert(ColumnSeries{12, 3}));
    REQUIRE_FALSE(narrow.insert(ColumnSeries{1, 2, 3}));
}

TEST_CASE("initial population is distinct, valid, and tabu-registered") {
    EvolutionConfig cfg;
    Rng rng(11);
    TabuList tabu(100);
    const std::vector<ColumnSeries> population = init_population(100, cfg, rng, tabu);

    REQUIRE(population.size() == cfg.population_size);
    REQUIRE(valid_population(population, 100));
    std::set<ColumnSeries> unique(population.begin(), population.end());
    REQUIRE(unique.size() == population.size());
    for (const ColumnSeries& s : population) {
        REQUIRE(s.size() >= 2);
        REQUIRE(s.size() <= 4);
        REQUIRE(tabu.contains(s));
    }

    Rng rng2(11);
    TabuList tabu2(100);
    REQUIRE(init_population(100, cfg, rng2, tabu2) == population);

    Rng rng3(12);
    TabuList tabu3(100);
    REQUIRE(init_population(100, cfg, rng3, tabu3) != population);
}

TEST_CASE("initialization stops when the search space is exhausted") {
    EvolutionConfig cfg;
    Rng rng(13);
    TabuList tabu(3);
    const std::vector<ColumnSeries> population = init_population(3, cfg, rng, tabu);
    // 3 columns allow 6 ordered pairs and 6 ordered triples.
    REQUIRE(population.size() == 12);
    std::set<ColumnSeries> unique(population.begin(), population.end());
    REQUIRE(unique.size() == 12);
}

TEST_CASE("initialization rejects matrices without enough columns") {
    EvolutionConfig cfg;
    Rng rng(14);
    TabuList tabu(2);
    REQUIRE_THROWS_WITH(init_population(2, cfg, rng, tabu), "matrix too narrow");
}

TEST_CASE("tournament selection prefers less crowded equal-fitness candidates") {
    EvolutionConfig cfg;
    cfg.tournament_size = 64;  // with 2 candidates, both are drawn in practice
    const std::vector<ColumnSeries> population = {{0, 1, 2}, {5, 6, 7}};
    const std::vector<double> fitness = {10.0, 10.0};

    ColumnPenaltyTable penalties(10);
    for (int i = 0; i < 5; ++i) penalties.add(population[0]);
    REQUIRE(penalties.mean_usage(population[0]) == 5.0);
    REQUIRE(penalties.mean_usage(population[1]) == 0.0);

    Rng rng(15);
    REQUIRE(tournament_select(population, fitness, penalties, cfg, rng) == 1);

    // Scale invariance: multiplying all fitnesses by a constant changes nothing.
    const std::vector<double> scaled = {10000.0, 10000.0};
    Rng rng2(15);
    REQUIRE(tournament_select(population, scaled, penalties, cfg, rng2) == 1);
}

TEST_CASE("tournament selection reduces to plain fitness without penalties") {
    EvolutionConfig cfg;
    cfg.tournament_size = 64;
    const std::vector<ColumnSeries> population = {{0, 1}, {2, 3}, {4, 5}};
    const std::vector<double> fitness = {1.0, 8.0, 3.0};
    ColumnPenaltyTable penalties(6);
    Rng rng(16);
    for (int i = 0; i < 20; ++i)
        REQUIRE(tournament_select(population, fitness, penalties, cfg, rng) == 1);
}

TEST_CASE("top-rank update admits, blocks, and evicts by fitness and overlap") {
    EvolutionConfig cfg;
    cfg.overlap_threshold = 0.5;

    TopRankList list(10);
    REQUIRE(list.empty());

    list.update(std::vector<ColumnSeries>{{1, 2, 3, 4}}, std::vector<double>{10.0}, cfg);
    REQUIRE(list.size() == 1);

    // Overlap 3/4 with a higher-fitness entry blocks admission.
    list.update(std::vector<ColumnSeries>{{1, 2, 3, 5}}, std::vector<double>{8.0}, cfg);
    REQUIRE(list.size() == 1);

    // Disjoint columns are admitted.
    list.update(std::vector<ColumnSeries>{{5, 6, 7, 8}}, std::vector<double>{8.0}, cfg);
    REQUIRE(list.size() == 2);

    // A stronger overlapping candidate evicts the weaker entry.
    list.update(std::vector<ColumnSeries>{{5, 6, 7, 9}}, std::vector<double>{12.0}, cfg);
    REQUIRE(list.size() == 2);
    REQUIRE(list.entries()[0].series == ColumnSeries{5, 6, 7, 9});
    REQUIRE(list.entries()[1].series == ColumnSeries{1, 2, 3, 4});

    // Non-positive fitness candidates are ignored.
    list.update(std::vector<ColumnSeries>{{8, 9}}, std::vector<double>{0.0}, cfg);
    REQUIRE(list.size() == 2);

    check_top_rank_invariants(list, cfg);
}

TEST_CASE("top-rank update truncates to capacity keeping the best") {
    EvolutionConfig cfg;
    cfg.top_rank_capacity = 3;
    cfg.overlap_threshold = 0.5;

    TopRankList list(40);
    std::vector<ColumnSeries> population;
    std::vector<double> fitness;
    for (std::size_t i = 0; i < 10; ++i) {
        population.push_back({static_cast<ColumnIndex>(2 * i), static_cast<ColumnIndex>(2 * i + 1)});
        fitness.push_back(static_cast<double>(i + 1));
    }
    list.update(population, fitness, cfg);
    REQUIRE(list.size() == 3);
    REQUIRE(list.entries()[0].fitness == 10.0);
    REQUIRE(list.entries()[2].fitness == 8.0);
    check_top_rank_invariants(list, cfg);
}

TEST_CASE("top-rank keeps earlier entries ahead on fitness ties") {
    EvolutionConfig cfg;
    TopRankList list(20);
    list.update(std::vector<ColumnSeries>{{0, 1}}, std::vector<double>{5.0}, cfg);
    list.update(std::vector<ColumnSeries>{{4, 5}}, std::vector<double>{5.0}, cfg);
    REQUIRE(list.size() == 2);
    REQUIRE(list.entries()[0].series == ColumnSeries{0, 1});
    REQUIRE(list.entries()[1].series == ColumnSeries{4, 5});
}

TEST_CASE("generation building fills the population with novel children") {
    EvolutionConfig cfg;
    cfg.population_size = 60;
    Rng rng(21);
    TabuList tabu(30);
    const std::vector<ColumnSeries> prev = init_population(30, cfg, rng, tabu);

    std::vector<double> prev_fitness(prev.size());
    for (std::size_t i = 0; i < prev.size(); ++i) prev_fitness[i] = 1.0 + static_cast<double>(i % 7);

    TopRankList top_rank(30);
    top_rank.update(prev, prev_fitness, cfg);
    const std::size_t rank_size = top_rank.size();

    ColumnPenaltyTable penalties(30);
    const GenerationResult next =
        build_generation(prev, prev_fitness, top_rank, tabu, penalties, cfg, 30, rng);

    REQUIRE_FALSE(next.terminated);
    REQUIRE(next.individuals.size() == cfg.population_size);
    REQUIRE(valid_population(next.individuals, 30));
    REQUIRE(next.elite_count == static_cast<std::size_t>(
                                    std::ceil(cfg.elite_fraction * static_cast<double>(rank_size))));
    for (std::size_t e = 0; e < next.elite_count; ++e) {
        REQUIRE(next.individuals[e] == top_rank.entries()[e].series);
        REQUIRE(next.elite_fitness[e] == top_rank.entries()[e].fitness);
    }
    // Novel children were registered in the tabu list.
    for (std::size_t i = next.elite_count; i < next.individuals.size(); ++i)
        REQUIRE(tabu.contains(next.individuals[i]));
}

TEST_CASE("generation building terminates when every child is already known") {
    EvolutionConfig cfg;
    cfg.population_size = 20;

    // Pre-fill the tabu list with every possible series over 3 columns.
    TabuList tabu(3);
    const ColumnIndex cols[3] = {0, 1, 2};
    std::vector<ColumnSeries> all;
    for (ColumnIndex a : cols)
        for (ColumnIndex b : cols) {
            if (a == b) continue;
            all.push_back({a, b});
            for (ColumnIndex c : cols)
                if (c != a && c != b) all.push_back({a, b, c});
        }
    for (const ColumnSeries& s : all) tabu.insert(s);

    std::vector<double> fitness(all.size(), 1.0);
    TopRankList top_rank(3);
    ColumnPenaltyTable penalties(3);
    Rng rng(22);
    const GenerationResult next =
        build_generation(all, fitness, top_rank, tabu, penalties, cfg, 3, rng);
    REQUIRE(next.terminated);
    REQUIRE(next.tabu_hits > cfg.population_size);
}

TEST_CASE("full runs are deterministic at any worker count") {
    ScenarioSpec spec;
    spec.n_rows = 60;
    spec.n_cols = 20;
    spec.blocks.assign(1, {10, 6});
    spec.pattern = Pattern::kTrendPreserving;
    spec.seed = 31;
    const GeneratedScenario data = generate(spec);

    RunConfig cfg;
    cfg.evo.population_size = 80;
    cfg.evo.max_iterations = 40;
    cfg.evo.rng_seed = 77;

    std::vector<std::vector<TopRankEntry>> results;
    for (unsigned threads : {1u, 2u, 8u}) {
        cfg.threads = threads;
        results.push_back(run(data.matrix, cfg).top_rank);
    }
    for (std::size_t i = 1; i < results.size(); ++i) {
        REQUIRE(results[i].size() == results[0].size());
        for (std::size_t e = 0; e < results[0].size(); ++e) {
            REQUIRE(results[i][e].series == results[0][e].series);
            REQUIRE(results[i][e].fitness == results[0][e].fitness);
        }
    }
}

TEST_CASE("runs never evaluate the same series twice") {
    ScenarioSpec spec;
    spec.n_rows = 50;
    spec.n_cols = 15;
    spec.blocks.assign(1, {8, 5});
    spec.pattern = Pattern::kShift;
    spec.seed = 32;
    const GeneratedScenario data = generate(spec);

    RunConfig cfg;
    cfg.evo.population_size = 60;
    cfg.evo.max_iterations = 50;
    cfg.evo.rng_seed = 5;

    std::set<ColumnSeries> seen;
    std::uint64_t evaluated = 0;
    RunHooks hooks;
    hooks.on_evaluate = [&](std::span<const ColumnSeries> batch) {
        for (const ColumnSeries& s : batch) {
            REQUIRE(seen.insert(s).second);
            ++evaluated;
        }
    };
    const RunResult result = run(data.matrix, cfg, hooks);
    REQUIRE(evaluated == result.series_evaluated);
    REQUIRE(evaluated == seen.size());
}

TEST_CASE("the best fitness never decreases between generations") {
    ScenarioSpec spec;
    spec.n_rows = 80;
    spec.n_cols = 25;
    spec.blocks.assign(2, {12, 6});
    spec.pattern = Pattern::kTrendPreserving;
    spec.seed = 33;
    const GeneratedScenario data = generate(spec);

    RunConfig cfg;
    cfg.evo.population_size = 100;
    cfg.evo.max_iterations = 60;
    cfg.evo.rng_seed = 9;

    double best = 0.0;
    RunHooks hooks;
    hooks.on_generation = [&](std::size_t, const TopRankList& list) {
        REQUIRE(list.best_fitness() >= best);
        best = list.best_fitness();
        check_top_rank_invariants(list, cfg.evo);
    };
    run(data.matrix, cfg, hooks);
    REQUIRE(best > 0.0);
}

TEST_CASE("zero iterations returns the initialization-only list") {
    ScenarioSpec spec;
    spec.n_rows = 40;
    spec.n_cols = 12;
    spec.pattern = Pattern::kTrendPreserving;
    spec.seed = 34;
    const GeneratedScenario data = generate(spec);

    RunConfig cfg;
    cfg.evo.max_iterations = 0;
    cfg.evo.rng_seed = 1;
    const RunResult result = run(data.matrix, cfg);
    REQUIRE(result.generations == 0);
    REQUIRE(result.narrow_matrix_warning);  // 12 columns
    REQUIRE_FALSE(result.top_rank.empty());
}

TEST_CASE("runs on narrow column spaces terminate through the tabu list") {
    ScenarioSpec spec;
    spec.n_rows = 30;
    spec.n_cols = 3;
    spec.pattern = Pattern::kTrendPreserving;
    spec.seed = 35;
    const GeneratedScenario data = generate(spec);

    RunConfig cfg;
    cfg.evo.population_size = 40;
    cfg.evo.max_iterations = 500;
    const RunResult result = run(data.matrix, cfg);
    REQUIRE(result.tabu_terminated);
    REQUIRE(result.generations < 500);
    REQUIRE(result.series_evaluated <= 12);  // the whole space over 3 columns
}

TEST_CASE("running on a two-column matrix is an error") {
    ExpressionMatrix m = ExpressionMatrix::with_shape(10, 2);
    RunConfig cfg;
    REQUIRE_THROWS_WITH(run(m, cfg), "matrix too narrow");
}

// Generates a small dataset with three planted biclusters, searches it, and
// prints what was found next to the ground truth.

#include <iostream>

#include "ebic/ebic.hpp"

int main() {
    ebic::ScenarioSpec spec;
    spec.n_rows = 150;
    spec.n_cols = 100;
    spec.blocks.assign(3, {15, 15});
    spec.pattern = ebic::Pattern::kTrendPreserving;
    spec.seed = 42;
    const ebic::GeneratedScenario data = ebic::generate(spec);

    ebic::RunConfig cfg;
    cfg.evo.max_iterations = 2000;
    cfg.evo.rng_seed = 7;
    const ebic::RunResult result = ebic::run(data.matrix, cfg);

    const std::vector<ebic::Bicluster> found = ebic::finalize_biclusters(
        result.top_rank, data.matrix, ebic::ExpansionOptions{}, cfg.epsilon,
        ebic::OutputOptions{}, result.sigma_used);

    std::vector<ebic::CellRect> found_rects;
    for (const ebic::Bicluster& b : found) found_rects.push_back(ebic::rect_of(b));

    const ebic::ScoreReport report = ebic::score_biclusters(data.truth, found_rects);
    std::cout << "found " << found.size() << " biclusters in " << result.generations
              << " generations\n"
              << "recovery  " << report.recovery << "\n"
              << "relevance " << report.relevance << "\n";
    return 0;
}

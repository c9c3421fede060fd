// Runs LinGapE and the XY baselines once on the d = 5 instance where the best arm
// has a near-duplicate, and prints stopping times and pull counts.
#include <chrono>
#include <cstdlib>
#include <iostream>

#include "lingape/algorithms.hpp"

int main(int argc, char** argv) {
    const double angle = argc > 1 ? std::atof(argv[1]) : 0.01;
    const lingape::Instance inst = lingape::make_setting_one(5, angle);

    for (auto algo : {lingape::Algorithm::LinGapEGreedy, lingape::Algorithm::LinGapERatio,
                      lingape::Algorithm::XYOracle, lingape::Algorithm::XYStatic, lingape::Algorithm::XYAdaptive}) {
        lingape::RunOptions opt;
        opt.seed = 7;
        const bool baseline = algo != lingape::Algorithm::LinGapEGreedy && algo != lingape::Algorithm::LinGapERatio;
        opt.lambda = baseline ? 0.01 : 1.0;
        const auto start = std::chrono::steady_clock::now();
        const auto rec = lingape::run_algorithm(algo, inst, opt);
        const std::chrono::duration<double> secs = std::chrono::steady_clock::now() - start;
        std::cout << lingape::algorithm_name(algo) << ": tau=" << rec.tau << " arm=" << rec.returned_arm + 1
                  << (rec.correct ? " (correct)" : " (wrong)") << " counts=";
        for (auto c : rec.counts) std::cout << c << ' ';
        std::cout << " [" << secs.count() << " s]\n";
    }
}

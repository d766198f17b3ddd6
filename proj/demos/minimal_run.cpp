// Smallest end-to-end use of the library: configure, run, print the trace.
#include <iostream>

#include "genfl/genfl.hpp"

int main() {
    genfl::ExperimentConfig cfg;
    cfg.seed = 7;
    cfg.num_clients = 10;
    cfg.clients_per_round = 4;
    cfg.rounds = 30;
    cfg.alpha = 0.1;
    cfg.samples_per_class = 60;
    cfg.train_spec.learning_rate = 0.1;
    cfg.train_spec.batch_size = 64;
    cfg.validate();

    const auto rows = genfl::run_experiment(cfg);
    for (const auto& m : rows)
        std::cout << "round " << m.round << "  acc=" << m.test_accuracy
                  << "  emd=" << m.mean_client_emd << "  pool=" << m.pool_size << "\n";
    return 0;
}

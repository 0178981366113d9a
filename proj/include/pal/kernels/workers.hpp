#pragma once

#include "pal/kernels/interfaces.hpp"
#include "pal/kernels/runtime.hpp"

namespace pal {

// Worker loops. Each owns its kernel for the whole run, snapshots it every
// progress_save_interval, and on shutdown runs finish_worker. A kernel that
// throws is reported to the manager as a failure stop; transport errors are
// never passed to the kernel.

void run_predictor(WorkerEnv& env, Predictor& k);
void run_generator(WorkerEnv& env, Generator& k);
void run_oracle(WorkerEnv& env, Oracle& k);
void run_trainer(WorkerEnv& env, Trainer& k);

}  // namespace pal

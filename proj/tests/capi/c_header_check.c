/* Compiled as C: the public header must stay valid C99. */
#include "rflow/rflow.h"

#include <string.h>

int rflow_c_header_check(void) {
    rflow_run_options run;
    rflow_sample_options sample;
    rflow_train_options train;
    rflow_run_options_init(&run);
    rflow_sample_options_init(&sample);
    rflow_train_options_init(&train);
    if (run.write_vtk != 1 || strcmp(run.output_dir, ".") != 0) return 0;
    if (sample.n != 10000 || train.epochs != 200 || train.hidden != NULL) return 0;
    return rflow_status_string(RFLOW_OK) != NULL;
}

#include <stdio.h>
#include "annuflow.h"
int main(void) {
    double cycles[] = {0.5};
    AnnuflowRun *run = NULL;
    if (annuflow_run_standard(ANNUFLOW_MODEL_MODEL2A, true, 21, cycles, 1, &run) != ANNUFLOW_STATUS_OK) return 1;
    if (annuflow_run_execute(run) != ANNUFLOW_STATUS_OK) { puts(annuflow_last_error()); return 2; }
    double mu[21];
    annuflow_run_snapshot_field(run, 0, ANNUFLOW_FIELD_VISCOSITY, mu, 21);
    printf("%s mu[10]=%g\n", annuflow_version(), mu[10]);
    annuflow_run_free(run);
    return 0;
}

#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "ppfxt.h"

#define CHECK(call)                                                    \
    do {                                                               \
        PpfxtStatus s_ = (call);                                       \
        if (s_ != PPFXT_STATUS_OK) {                                   \
            char msg_[256];                                            \
            ppfxt_last_error(msg_, sizeof msg_);                       \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, msg_);   \
            return 1;                                                  \
        }                                                              \
    } while (0)

int main(void) {
    PpfxtBoundProblem bp = {1.0, 1.0, 0.0, 1, 2, 3, 2, 0.5};
    double t1 = 0.0, t2 = 0.0;
    CHECK(ppfxt_bound_t1(&bp, &t1));
    CHECK(ppfxt_bound_t2(&bp, &t2));
    if (fabs(t1 - 4.442882938158366) > 1e-9 || fabs(t2 - 8.0) > 1e-12) {
        fprintf(stderr, "bad bounds %.15g %.15g\n", t1, t2);
        return 1;
    }

    bp.p_num = 3; bp.p_den = 5; bp.q_num = 5; bp.q_den = 3;
    if (ppfxt_bound_lemma2(&bp, &t1) != PPFXT_STATUS_PRECONDITION) return 1;

    PpfxtScenario *sc = NULL;
    PpfxtTrajectory *tr = NULL;
    CHECK(ppfxt_scenario_default(&sc));
    CHECK(ppfxt_scenario_set_t_end(sc, 1.5));
    CHECK(ppfxt_scenario_set_record_every(sc, 100));
    CHECK(ppfxt_simulate(sc, &tr));

    size_t n = ppfxt_trajectory_len(tr), len = 0;
    double *e1 = malloc(n * sizeof *e1);
    CHECK(ppfxt_trajectory_series(tr, "e1", e1, n, &len));
    PpfxtMetrics m;
    CHECK(ppfxt_trajectory_metrics(tr, &m));
    printf("samples=%zu e1_end=%.3e violations=%zu peak=%.3f\n", n, e1[n - 1], m.envelope_violations, m.peak_input);
    int ok = len == n && n == 151 && m.envelope_violations == 0;

    free(e1);
    ppfxt_trajectory_free(tr);
    ppfxt_scenario_free(sc);
    return ok ? 0 : 1;
}

/* Build: cc -I include examples/double_bic.c -L ../../target/release -l:libgabic_ffi.a -lm -lpthread -ldl */
#include <math.h>
#include <stdio.h>
#include "gabic.h"

int main(void) {
    const double pi = 3.14159265358979323846;
    GabicParams *p = NULL;
    GabicStatus s = gabic_params_new(202 * pi, 1.0, 202 * pi - 1.0, pi, 1.0, 1.0, 1.0, 1.0, &p);
    if (s != GABIC_STATUS_OK) {
        char msg[256];
        gabic_last_error(msg, sizeof msg);
        fprintf(stderr, "params: %s\n", msg);
        return 1;
    }

    GabicBic bics[4];
    size_t count = 0;
    gabic_find_bics(p, 0, 1e-9, bics, 4, &count);
    for (size_t i = 0; i < count; i++)
        printf("branch %+d  q = %lld  |residue| = %.3f\n", bics[i].branch, (long long)bics[i].q,
               hypot(bics[i].residue_re, bics[i].residue_im));

    GabicTrajectory *tr = NULL;
    s = gabic_integrate(p, 0, 1.0, 0.0, 0.0, 0.0, 50.0, 200, &tr);
    if (s == GABIC_STATUS_OK) {
        size_t n = gabic_trajectory_len(tr);
        static double pop[20001];
        gabic_trajectory_population(tr, pop, sizeof pop / sizeof pop[0]);
        printf("P(50) = %.6f\n", pop[n - 1]);
    }
    gabic_trajectory_free(tr);
    gabic_params_free(p);
    return s == GABIC_STATUS_OK ? 0 : 1;
}

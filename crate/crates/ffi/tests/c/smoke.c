#include <math.h>
#include <stdio.h>
#include "idealflow.h"

#define CHECK(expr)                                                     \
    do {                                                                \
        if ((expr) != ICF_STATUS_OK) {                                  \
            const char *msg = icf_last_error_message();                 \
            fprintf(stderr, "%s failed: %s\n", #expr, msg ? msg : "?"); \
            return 1;                                                   \
        }                                                               \
    } while (0)

int main(void) {
    const double tau = 6.283185307179586;
    uint32_t modes[] = {2};
    double amps[] = {1e-3}, phases[] = {0.0};
    IcfProfile *p = NULL;
    IcfFlow *f = NULL;
    double e0, e, w;

    CHECK(icf_profile_perturbed(tau, 1, 64, modes, amps, phases, 1, &p));
    CHECK(icf_profile_energy(p, &e0));
    CHECK(icf_flow_new(p, ICF_SCHEME_IMEX_BDF2, 1e-4, 0.0, &f));
    CHECK(icf_flow_step(f, 50));
    CHECK(icf_flow_energy(f, &e));
    CHECK(icf_profile_winding(p, &w));
    icf_flow_free(f);
    icf_profile_free(p);

    if (!(e < e0) || fabs(w - 1.0) > 1e-12) {
        fprintf(stderr, "unexpected values: e0=%g e=%g w=%g\n", e0, e, w);
        return 1;
    }
    if (icf_profile_circle(tau, 0, 64, &p) != ICF_STATUS_WINDING_MISMATCH) {
        return 1;
    }
    printf("ok %.6e -> %.6e\n", e0, e);
    return 0;
}

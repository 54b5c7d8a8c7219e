#include <math.h>
#include <stdio.h>
#include <string.h>

#include "mpideals.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #cond); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    MpAlgebra *alg = NULL;
    CHECK(mp_algebra_new_default(&alg) == MP_STATUS_OK);

    const char *diag =
        "{\"gamma\": [0, 0], \"blocks\": {\"1\": {\"rows\": 2, \"cols\": 2, "
        "\"data\": [[2, 0], [0, 0], [0, 0], [0, 0]]}}}";
    MpElement *a = NULL;
    CHECK(mp_element_from_json(alg, diag, &a) == MP_STATUS_OK);

    double norm = 0.0;
    CHECK(mp_element_norm(alg, a, &norm) == MP_STATUS_OK);
    CHECK(fabs(norm - 2.0) < 1e-12);

    MpElement *x = NULL;
    MpVerdicts v;
    double gap = 0.0;
    CHECK(mp_pseudoinverse(alg, a, &x, &v, &gap) == MP_STATUS_OK);
    CHECK(v.generalized_inverse && v.penrose && v.isolated_zero && v.functional_projection && v.mp_projection);
    CHECK(fabs(gap - 4.0) < 1e-12);
    CHECK(mp_element_norm(alg, x, &norm) == MP_STATUS_OK);
    CHECK(fabs(norm - 0.5) < 1e-12);

    CHECK(mp_element_from_json(alg, "{\"gamma\": [0,", &a) == MP_STATUS_INVALID_INPUT);
    CHECK(mp_last_error() != NULL);

    char *report = NULL;
    CHECK(mp_run_suite("t31-2", 1, 3, &report) == MP_STATUS_OK);
    CHECK(strstr(report, "\"passed\":true") != NULL);
    mp_string_free(report);
    CHECK(mp_run_suite("unknown", 1, 3, &report) == MP_STATUS_INVALID_INPUT);

    mp_element_free(x);
    mp_element_free(a);
    mp_algebra_free(alg);
    printf("ok %s\n", mp_version());
    return 0;
}

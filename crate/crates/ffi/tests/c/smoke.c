#include <math.h>
#include <stdio.h>
#include "patchbif.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        PbStatus s_ = (call);                                              \
        if (s_ != PB_OK) {                                                 \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,             \
                    pb_last_error_message());                              \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    PbPoint *p = NULL;
    double theta = 0.0;
    size_t n = 0;
    double radii[3], thetas[3];

    CHECK(pb_three_layer_bifurcation(0.5, -5.0, 2, 50, &p));
    CHECK(pb_point_theta(p, &theta));
    CHECK(pb_point_layers(p, &n, radii, thetas));
    printf("theta %.10f layers %zu b3 %.10f\n", theta, n, radii[2]);
    if (n != 3 || fabs(theta - 8.3915503) > 1e-6) return 2;

    PbBranch *b = NULL;
    CHECK(pb_continue(p, "{\"truncation\":8,\"quadrature\":128,\"max_steps\":2}", &b));
    size_t len = 0;
    double amp, th, res;
    CHECK(pb_branch_len(b, &len));
    CHECK(pb_branch_state(b, 0, &amp, &th, &res));
    printf("states %zu amplitude %.3e residual %.3e\n", len, amp, res);
    if (len != 2 || res > 1e-11) return 3;

    PbPoint *bad = NULL;
    if (pb_two_layer_bifurcation(0.5, 2, PB_ROOT_PLUS, 50, &bad) != PB_B_TOO_LARGE) return 4;
    printf("error: %s\n", pb_last_error_message());

    pb_branch_free(b);
    pb_point_free(p);
    return 0;
}

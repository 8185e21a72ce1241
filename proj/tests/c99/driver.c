/* Calls a few kernels rendered with the c99 profile. */
#include <math.h>
#include <stdio.h>

#include "chebyshev_T_runtime.h"
#include "chebyshev_T_unrolled.h"
#include "fibonacci_runtime.h"
#include "fibonacci_unrolled.h"
#include "hermite_e_layered.h"

static int failures = 0;

static void expect(const char* what, double got, double want) {
    if (fabs(got - want) > 1e-12 * (fabs(want) > 1.0 ? fabs(want) : 1.0)) {
        printf("FAIL %s: %.17g != %.17g\n", what, got, want);
        ++failures;
    }
}

int main(void) {
    int idx[1] = {4};
    int bound[1] = {4};
    double v = 0.0;
    double out[9];
    expect("fib(4)", combinatorics_fibonacci_4(), 3.0);
    if (combinatorics_fibonacci_runtime(idx, bound, &v) != 0) ++failures;
    expect("fib runtime", v, 3.0);
    expect("T3(0.5)", orthopoly_chebyshev_t_3(0.5), -1.0);
    idx[0] = 3;
    if (orthopoly_chebyshev_t_runtime(idx, bound, &v, 0.5) != 0) ++failures;
    expect("T3 runtime", v, -1.0);
    /* E^{11}_t with inv_2p = 0.25, PA = 0.3, PB = -0.2 */
    mcmd_hermite_coeff_x_layer_1_1(out, 0.25, 0.3, -0.2);
    expect("E11_0", out[0], 0.3 * -0.2 + 0.25);
    expect("E11_1", out[1], 0.25 * (0.3 - 0.2));
    expect("E11_2", out[2], 0.25 * 0.25);
    if (failures == 0) printf("c99 kernels ok\n");
    return failures != 0;
}

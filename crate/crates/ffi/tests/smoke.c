#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include "weingarten.h"

static const char *CONFIG =
    "[profile]\nkind = \"cosh\"\ndomain = [0.0, 4.0]\n"
    "[grid]\nn = 1\nN = 64\n"
    "[curvature]\nr = 1\n"
    "[prescription]\nform = \"radial\"\nc0 = 1.1752011936438014\nt_minus = 0.5\nt_plus = 1.5\n";

int main(void) {
    WwProblem *p = NULL;
    if (ww_problem_from_config(CONFIG, 0, &p) != WW_STATUS_OK) {
        fprintf(stderr, "config: %s\n", ww_last_error_message());
        return 1;
    }
    WwSolution *s = NULL;
    if (ww_solve(p, &s) != WW_STATUS_OK) {
        fprintf(stderr, "solve: %s\n", ww_last_error_message());
        return 2;
    }
    size_t n = ww_solution_len(s);
    double *z = malloc(n * sizeof *z);
    if (ww_solution_copy(s, z, n) != WW_STATUS_OK) return 3;
    double dev = 0.0;
    for (size_t i = 0; i < n; i++) dev = fmax(dev, fabs(z[i] - 1.0));
    printf("nodes %zu residual %.17g deviation %.17g\n", n, ww_solution_residual(s), dev);
    free(z);
    ww_solution_free(s);
    ww_problem_free(p);
    return dev <= 1e-8 ? 0 : 4;
}

/* Build: cargo build --release -p linfball-ffi
 *        cc -Icrates/ffi/include crates/ffi/examples/demo.c \
 *           target/release/liblinfball_ffi.a -lpthread -ldl -lm -o demo */
#include <stdio.h>
#include "linfball.h"

int main(void) {
    const double b[] = {0.5, 0.2, 0.1, 0.1};
    LfbMatrix *m = NULL;
    LfbResult *r = NULL;
    double x[4];

    LfbStatus st = lfb_matrix_new(2, 2, b, &m);
    if (st != LFB_STATUS_OK) {
        fprintf(stderr, "matrix: %s\n", lfb_status_string(st));
        return 1;
    }
    LfbOptions opts = lfb_options_default();
    st = lfb_project(m, 0.3, &opts, &r);
    if (st != LFB_STATUS_OK) {
        fprintf(stderr, "project: %s (%s)\n", lfb_status_string(st), lfb_last_error());
        lfb_matrix_free(m);
        return 1;
    }
    lfb_result_copy_x(r, x, 4);
    printf("gamma=%g iterations=%zu\n", lfb_result_gamma(r), lfb_result_iterations(r));
    printf("X = [%g %g; %g %g]\n", x[0], x[1], x[2], x[3]);
    lfb_result_free(r);

    st = lfb_project(m, -1.0, NULL, &r);
    printf("tau=-1: %s: %s\n", lfb_status_string(st), lfb_last_error());

    lfb_result_free(r);
    lfb_matrix_free(m);
    return 0;
}

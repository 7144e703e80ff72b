#include <math.h>
#include <stdio.h>
#include "cbmlab.h"

int main(void) {
    CbmModel *m = NULL;
    if (cbm_model_build("abs2(z1) - 1", "", 0.0, 0.0, 0, 0, 0, &m) != CBM_STATUS_OK) {
        fprintf(stderr, "%s\n", cbm_last_error());
        return 1;
    }
    double re = 0.0, im = 0.0;
    cbm_model_kernel(m, 0, 0, 0.0, 0.0, 0.0, 0.0, &re, &im);
    cbm_model_free(m);
    if (fabs(re - 1.0 / (2.0 * M_PI)) > 1e-10) {
        return 2;
    }
    CbmExpr *e = NULL;
    if (cbm_expr_parse("z1 + + 2", &e) != CBM_STATUS_PARSE) {
        return 3;
    }
    printf("ok %s\n", cbm_version());
    return 0;
}

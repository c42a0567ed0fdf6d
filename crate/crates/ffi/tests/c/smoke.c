#include <stdio.h>
#include <string.h>
#include "cvqec.h"

int main(void) {
    double v = 0.0;
    if (cvqec_residual_variance(0.4472135954999579, &v) != CVQEC_STATUS_OK) return 1;
    if (v < 0.1158 || v > 0.1161) return 2;

    CvqecDecoder *dec = NULL;
    if (cvqec_decoder_new(1, 0.1, 0.0, &dec) != CVQEC_STATUS_OK) return 3;
    double eps[7] = {0, 0, 0, 0, 2.5, 0, 0};
    double s[3];
    if (cvqec_syndrome(1, eps, s) != CVQEC_STATUS_OK) return 4;
    CvqecDecodeResult r;
    if (cvqec_decoder_decode(dec, s, 4.0, &r) != CVQEC_STATUS_OK) return 5;
    if (r.j_star != 5 || !r.triggered) return 6;
    cvqec_decoder_free(dec);

    if (cvqec_modular_reduce(1.0, NULL) != CVQEC_STATUS_NULL_POINTER) return 7;
    if (strlen(cvqec_last_error()) == 0) return 8;

    CvqecStats *st = NULL;
    if (cvqec_experiment_run("{\"rounds\": 5, \"trajectories\": 4}", 1, 1, &st) != CVQEC_STATUS_OK) return 9;
    double mean[5];
    if (cvqec_stats_rounds(st) != 5 || cvqec_stats_copy_mean(st, mean, 5) != CVQEC_STATUS_OK) return 10;
    cvqec_stats_free(st);
    printf("ok %s\n", cvqec_version());
    return 0;
}

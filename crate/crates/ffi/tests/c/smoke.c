#include <stdio.h>
#include <string.h>

#include "riscb.h"

static int check(RiscbStatus s, const char *what) {
    if (s != RISCB_STATUS_OK) {
        const char *msg = riscb_last_error_message();
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, msg ? msg : "?");
        return 1;
    }
    return 0;
}

int main(void) {
    RiscbComplexity c;
    if (check(riscb_complexity(8, 100, 50, 1, 4, &c), "complexity")) return 1;
    if (c.ao_estimation != 1616 || c.proposed_optimization != 2800) return 2;

    RiscbConfig *cfg = NULL;
    if (check(riscb_config_from_toml("[run]\ntrials = 4\nschemes = [\"proposed\", \"no_ris\"]\n", &cfg), "config")) return 1;
    RiscbResults *res = NULL;
    if (check(riscb_run(cfg, &res), "run")) return 1;
    size_t rows = 0;
    if (check(riscb_results_row_count(res, &rows), "rows")) return 1;
    if (rows != 2) return 3;
    RiscbRateRow row;
    char label[32];
    size_t needed = 0;
    if (check(riscb_results_rate_row(res, 0, &row), "row")) return 1;
    if (check(riscb_results_scheme(res, 0, label, sizeof label, &needed), "scheme")) return 1;
    if (strcmp(label, "proposed") != 0 || row.trials != 4) return 4;

    if (riscb_config_from_preset("nope", &cfg) != RISCB_STATUS_CONFIG) return 5;
    if (riscb_last_error_message() == NULL) return 6;

    riscb_results_free(res);
    riscb_config_free(cfg);
    printf("ok %.3f\n", row.mean_realized_rate);
    return 0;
}

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "ar_rul.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__,   \
                    __LINE__, #cond);                                \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    CHECK(strlen(ar_rul_version()) > 0);

    size_t idx = 0;
    CHECK(ar_rul_fpt_table_index("B1-3", &idx) == AR_RUL_STATUS_OK);
    CHECK(idx == 960);
    CHECK(ar_rul_fpt_table_index("B9-9", &idx) == AR_RUL_STATUS_INVALID_ARG);
    CHECK(ar_rul_last_error() != NULL);

    double truth[1] = {1.0};
    double pred[1] = {0.0};
    double s = 0.0;
    /* E = 1 - 0 = 1 > 0 */
    CHECK(ar_rul_score(pred, truth, 1, &s) == AR_RUL_STATUS_OK);
    CHECK(fabs(s - (exp(0.1) - 1.0)) < 1e-12);

    ArRulModel *model = NULL;
    CHECK(ar_rul_model_load(NULL, &model) == AR_RUL_STATUS_NULL_ARG);
    CHECK(ar_rul_model_load("/nonexistent", &model) == AR_RUL_STATUS_IO);
    CHECK(model == NULL);
    ar_rul_model_free(NULL);

    puts("ok");
    return 0;
}

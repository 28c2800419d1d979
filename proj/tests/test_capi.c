/* Exercises the C interface from plain C. */
#define _GNU_SOURCE
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <unistd.h>

#include "lteval/lteval.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                               \
        }                                                             \
    } while (0)

static const char* kConfig =
    "seed: 4\n"
    "dataset:\n  kind: waveform40\n  limit: 1000\n"
    "model:\n  id: hoeffding_tree\n"
    "protocol:\n  mode: streaming\n  n0: 100\n  lambda: 2\n  window_w: 100\n"
    "meter:\n  kind: deterministic\n";

static void join(char* out, size_t n, const char* a, const char* b) { snprintf(out, n, "%s/%s", a, b); }

int main(void) {
    char root[] = "/tmp/lteval-capi-XXXXXX";
    if (!mkdtemp(root)) return 2;
    char path[512];

    EXPECT(strlen(lteval_version()) > 0);

    lteval_experiment* exp = NULL;
    EXPECT(lteval_experiment_open_text("seed: [", "bad.yaml", &exp) == LTEVAL_ERR_CONFIG);
    EXPECT(exp == NULL);
    EXPECT(strstr(lteval_last_error(), "bad.yaml") != NULL);
    EXPECT(lteval_experiment_open("/nonexistent/x.yaml", &exp) == LTEVAL_ERR_CONFIG);
    EXPECT(lteval_experiment_open_text(NULL, NULL, &exp) == LTEVAL_ERR_INVALID_ARG);
    EXPECT(lteval_experiment_run(NULL) == LTEVAL_ERR_INVALID_ARG);

    EXPECT(lteval_experiment_open_text(kConfig, "capi.yaml", &exp) == LTEVAL_OK);
    EXPECT(strcmp(lteval_last_error(), "") == 0);
    EXPECT(lteval_experiment_is_sweep(exp) == 0);
    join(path, sizeof path, root, "run");
    EXPECT(lteval_experiment_set_output_dir(exp, path) == LTEVAL_OK);
    EXPECT(lteval_experiment_run(exp) == LTEVAL_OK);
    EXPECT(strcmp(lteval_experiment_output_dir(exp), path) == 0);
    EXPECT(lteval_experiment_checkpoint_count(exp) == 4);

    lteval_checkpoint cp;
    uint64_t expected_t = 100;
    for (size_t i = 0; i < lteval_experiment_checkpoint_count(exp); ++i) {
        EXPECT(lteval_experiment_checkpoint(exp, i, &cp) == LTEVAL_OK);
        EXPECT(cp.k == i);
        EXPECT(cp.t_k == expected_t);
        EXPECT(cp.train_events == expected_t);
        EXPECT(cp.has_accuracy && cp.accuracy >= 0.0 && cp.accuracy <= 1.0);
        EXPECT(cp.support == 100);
        expected_t *= 2;
    }
    EXPECT(lteval_experiment_checkpoint(exp, 4, &cp) == LTEVAL_ERR_INVALID_ARG);

    lteval_checkpoint first;
    lteval_experiment_checkpoint(exp, 0, &first);
    EXPECT(lteval_experiment_set_seed(exp, 99) == LTEVAL_OK);
    join(path, sizeof path, root, "run99");
    lteval_experiment_set_output_dir(exp, path);
    EXPECT(lteval_experiment_run(exp) == LTEVAL_OK);
    EXPECT(lteval_experiment_checkpoint_count(exp) == 4);

    size_t cells = 0, failed = 0;
    EXPECT(lteval_experiment_sweep(exp, &cells, &failed) == LTEVAL_ERR_CONFIG);
    lteval_experiment_close(exp);

    char sweep_text[1024];
    snprintf(sweep_text, sizeof sweep_text, "%sgrid:\n  protocol.lambda: [2, 4]\n", kConfig);
    EXPECT(lteval_experiment_open_text(sweep_text, "sweep.yaml", &exp) == LTEVAL_OK);
    EXPECT(lteval_experiment_is_sweep(exp) == 1);
    EXPECT(lteval_experiment_run(exp) == LTEVAL_ERR_CONFIG);
    join(path, sizeof path, root, "sweep");
    lteval_experiment_set_output_dir(exp, path);
    EXPECT(lteval_experiment_sweep(exp, &cells, &failed) == LTEVAL_OK);
    EXPECT(cells == 2 && failed == 0);
    lteval_experiment_close(exp);

    char a[512], b[512], out[512];
    join(a, sizeof a, root, "run");
    join(b, sizeof b, root, "run99");
    join(out, sizeof out, root, "fig.svg");
    const char* dirs[] = {a, b};
    EXPECT(lteval_plot(dirs, 2, out) == LTEVAL_OK);
    EXPECT(access(out, F_OK) == 0);
    join(out, sizeof out, root, "fig.csv");
    EXPECT(access(out, F_OK) == 0);
    EXPECT(lteval_plot(dirs, 0, out) == LTEVAL_ERR_INVALID_ARG);
    const char* missing[] = {"/nonexistent"};
    EXPECT(lteval_plot(missing, 1, out) == LTEVAL_ERR_RUNTIME);
    EXPECT(strlen(lteval_last_error()) > 0);

    lteval_experiment_close(NULL);

    char cmd[600];
    snprintf(cmd, sizeof cmd, "rm -rf '%s'", root);
    if (system(cmd) != 0) fprintf(stderr, "could not remove %s\n", root);

    if (failures) fprintf(stderr, "%d expectation(s) failed\n", failures);
    else printf("C API: all expectations passed\n");
    return failures ? 1 : 0;
}

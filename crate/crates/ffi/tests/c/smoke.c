#include <stdio.h>
#include <string.h>

#include "tweetscope.h"

#define CHECK(cond)                                                    \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, \
              #cond);                                                  \
      return 1;                                                        \
    }                                                                  \
  } while (0)

int main(void) {
  TsMetrics m;
  CHECK(ts_metrics(34, 1, 5, 30, &m) == TS_STATUS_OK);
  CHECK(m.accuracy > 0.914 && m.accuracy < 0.915);
  CHECK(ts_metrics(0, 0, 0, 0, &m) == TS_STATUS_UNDEFINED_METRIC);
  CHECK(ts_last_error() != NULL);

  char *stem = NULL;
  CHECK(ts_stem("generalizations", &stem) == TS_STATUS_OK);
  CHECK(strcmp(stem, "gener") == 0);
  ts_string_free(stem);

  char *masked = NULL;
  size_t n = 0;
  CHECK(ts_mask_abusive("you WORD1 fool", "word1\n", 7, &masked, &n) ==
        TS_STATUS_OK);
  CHECK(strcmp(masked, "you abuvs3363 fool") == 0);
  CHECK(n == 1);
  ts_string_free(masked);

  TsLexicon *lex = NULL;
  CHECK(ts_lexicon_load("good\tpositive\t1\nbad\tnegative\t1\n", &lex) ==
        TS_STATUS_OK);
  double valence = 0.0;
  size_t matched = 0;
  CHECK(ts_lexicon_score(lex, "good good bad", &valence, &matched) ==
        TS_STATUS_OK);
  CHECK(matched == 3);
  ts_lexicon_free(lex);

  CHECK(ts_nb_predict(NULL, "x", NULL) == TS_STATUS_NULL_POINTER);
  puts("ok");
  return 0;
}

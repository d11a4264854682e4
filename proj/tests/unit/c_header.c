/* Copyright 2026 The lorpman Authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Compiles the public header as C99 and makes a few calls through it.
 */

#include <stdio.h>

#include "lorpman/lorpman.h"

int main(void) {
  lpm_front* front = NULL;
  const double a[2] = {1.0, 1.0};
  const double ref[2] = {0.0, 0.0};
  double hv = 0.0;
  if (lpm_front_create(2, LPM_MAXIMIZE, &front) != LPM_OK) return 1;
  if (lpm_front_add(front, a, 2) != LPM_OK) return 1;
  if (lpm_front_hypervolume(front, ref, 2, NULL, &hv, NULL) != LPM_OK) return 1;
  lpm_front_destroy(front);
  if (hv != 1.0) {
    fprintf(stderr, "unexpected hypervolume %g\n", hv);
    return 1;
  }
  printf("lorpman %s\n", lpm_version());
  return 0;
}

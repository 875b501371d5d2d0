#include <stdio.h>

int main(void) {
  int bound;
  int s = 0;
  int k;
  scanf("%d", &bound);
  for (k = 1; k <= bound; k++) {
    s += k;
  }
  printf("%d\n", s);
  return 0;
}

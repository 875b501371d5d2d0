#include <stdio.h>

int main(void) {
  int n;
  int answer = 0;
  int i;
  scanf("%d", &n);
  /* add everything up to n */
  for (i = 1; i <= n; i++) {
    answer = answer + i;
  }
  printf("%d\n", answer);
  return 0;
}

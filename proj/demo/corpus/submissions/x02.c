#include <stdio.h>

int main(void) {
  int n;
  int total = 1;
  int i;
  scanf("%d", &n);
  for (i = 1; i <= n; i++) {
    total = total + i;
  }
  printf("%d\n", total);
  return 0;
}

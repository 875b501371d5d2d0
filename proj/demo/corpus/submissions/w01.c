#include <stdio.h>

int main(void) {
  int n;
  int total = 0;
  int k = 1;
  scanf("%d", &n);
  while (k <= n) {
    total += k;
    k++;
  }
  printf("%d\n", total);
  return 0;
}

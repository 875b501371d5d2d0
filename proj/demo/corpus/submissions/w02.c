#include <stdio.h>

int main(void) {
  int limit;
  int sum = 0;
  int idx = 1;
  scanf("%d", &limit);
  while (idx <= limit) {
    sum = sum + idx;
    idx = idx + 1;
  }
  printf("%d\n", sum);
  return 0;
}

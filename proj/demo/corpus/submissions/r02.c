#include <stdio.h>

int total_below(int limit) {
  if (limit <= 1) {
    return 1;
  }
  return limit + total_below(limit - 1);
}

int main(void) {
  int limit;
  scanf("%d", &limit);
  printf("%d\n", total_below(limit));
  return 0;
}

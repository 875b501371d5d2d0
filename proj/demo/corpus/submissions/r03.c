#include <stdio.h>

/* recursive accumulation */
int acc(int v) {
  if (v <= 1) {
    return 1;
  }
  return v + acc(v - 1);
}

int main(void) {
  int v;
  scanf("%d", &v);
  printf("%d\n", acc(v));
  return 0;
}

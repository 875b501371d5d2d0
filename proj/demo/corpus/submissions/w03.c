#include <stdio.h>

int main(void) {
  int n;
  int t = 0;
  int c = 1;
  scanf("%d", &n);
  while (c <= n) {
    t += c;
    c++;
  }
  printf("%d\n", t);
  return 0;
}

int main() {
  int a = 100;
  int b = 5;
  int r = 0;
  if (a > b) {
    r = a / b;
  }
  int x = a + 1;
  int y = b * 2;
  return r + x + y;
}

int main() {
  int a = 3;
  int b = 4;
  int c = a + b;
  return c;
}

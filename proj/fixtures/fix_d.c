int main() {
  int a = 100;
  int b = 7;
  int q = a / b;
  return q;
}

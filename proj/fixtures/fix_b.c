int work(int x) {
  return x * 2;
}
int main() {
  int sum = 0;
  for (int i = 0; i < 10; i = i + 1) {
    sum = sum + work(i);
  }
  return sum;
}

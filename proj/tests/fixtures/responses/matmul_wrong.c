#include <stdio.h>
#include <stdlib.h>

#define N 512

static double A[N][N], B[N][N], C[N][N];

static void init(void) {
    for (int i = 0; i < N; i++)
        for (int j = 0; j < N; j++) {
            A[i][j] = (double)((i * 7 + j * 3) % 17) / 17.0;
            B[i][j] = (double)((i * 5 + j * 11) % 13) / 13.0;
            C[i][j] = 0.0;
        }
}

void matmul(void) {
    for (int i = 0; i < N; i++)
        for (int j = 0; j < N; j++)
            for (int k = 0; k < N; k++)
                C[i][j] += A[i][k] * B[j][k];
}

int main(void) {
    init();
    matmul();
    double sum = 0.0;
    for (int i = 0; i < N; i++)
        for (int j = 0; j < N; j++) sum += C[i][j];
    printf("checksum %.10e\n", sum);
    printf("corners %.10e %.10e %.10e\n", C[0][0], C[N - 1][0], C[N - 1][N - 1]);
    return 0;
}

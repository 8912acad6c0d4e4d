/* Transformed function ver 1, split point written as N/2 */
#define N 1024
foo(int A[], int B[], int C[])
{
  int k, tmp[N], buf[N];
  for(k=0; k<N/2; k++)
t1: tmp[k] = B[2*k] + B[k];
  for(k=0; k<N; k++){
t2: buf[k] = A[2*k] + A[k];
    if (k < N/2)
t3:   C[k] = tmp[k] + buf[k];
    else
t4:   C[k] = (B[2*k] + B[k]) + buf[k];
  }
}

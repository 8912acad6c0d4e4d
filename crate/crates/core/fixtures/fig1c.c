/* Transformed function ver 2 */
#define N 1024
foo(int A[], int B[], int C[])
{
  int k, buf[2*N];
  for(k=0; k<N; k++)
u1: buf[k] = A[k] + B[k];
  for(k=N; k<=2*N-2; k+=2)
u2: buf[k] = A[k] + B[k];
  for(k=0; k<N; k++)
u3: C[k] = buf[k] + buf[2*k];
}

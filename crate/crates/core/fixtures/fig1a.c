/* Original function */
#define N 1024
foo(int A[], int B[], int C[])
{
  int k, tmp[N], buf[2*N];
  for(k=0; k<N; k++)
s1: tmp[k] = B[2*k] + B[k];
  for(k=N; k>=1; k--)
s2: buf[2*k-2] = A[2*k-2] + A[k-1];
  for(k=0; k<N; k++)
s3: C[k] = tmp[k] + buf[2*k];
}

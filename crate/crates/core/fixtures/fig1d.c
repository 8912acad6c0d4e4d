/* Transformed function ver 3 */
#define N 1024
foo(int A[], int B[], int C[])
{
  int k, tmp[N], buf[2*N];
  for(k=0; k<=2*N-2; k+=2)
v1: buf[k] = A[k] + B[k];
  for(k=1; k<N; k+=2)
v2: tmp[k] = A[k] + B[k];
  for(k=0; k<N-1; k+=2){
v3: C[k] = buf[k] + buf[k];
v4: C[k+1] = tmp[k+1] + buf[2*k+2];
  }
}

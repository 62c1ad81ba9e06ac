import logging

from django.http import HttpResponse
from rest_framework import status, viewsets
from rest_framework.decorators import action, api_view
from rest_framework.permissions import AllowAny, IsAuthenticatedOrReadOnly
from rest_framework.response import Response
from rest_framework.views import APIView

from .caching.curves import curve_csv
from .caching.errors import InfeasibleAuditError, PrivCacheError
from .models import AuditRun
from .serializers import AuditRunSerializer, CurveRequestSerializer, RunConfigSerializer
from .tasks import run_audit
from .utils import point_summary, preflight, simulate_summary

logger = logging.getLogger(__name__)


def error_response(exc):
    if isinstance(exc, InfeasibleAuditError):
        return Response({'error': str(exc), 'states': exc.states, 'ceiling': exc.ceiling, 'hint': exc.hint},
                        status=status.HTTP_422_UNPROCESSABLE_ENTITY)
    return Response({'error': str(exc)}, status=status.HTTP_400_BAD_REQUEST)


@api_view(['GET'])
def status_view(request):
    return Response({
        'status': 'OK'
    })


class PointView(APIView):
    permission_classes = [AllowAny]

    def post(self, request, *args, **kwargs):
        serializer = RunConfigSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        config = {**serializer.validated_data, 'measure': bool(request.data.get('measure'))}
        try:
            return Response(point_summary(serializer.build(), config))
        except PrivCacheError as exc:
            return error_response(exc)


class CurveView(APIView):
    permission_classes = [AllowAny]

    def post(self, request, *args, **kwargs):
        serializer = CurveRequestSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data
        try:
            body = curve_csv(data['n'], data['k'], data['samples'])
        except PrivCacheError as exc:
            return error_response(exc)
        return HttpResponse(body, content_type='text/csv')


class SimulateView(APIView):
    permission_classes = [AllowAny]

    def post(self, request, *args, **kwargs):
        serializer = RunConfigSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        config = {**serializer.validated_data, 'table': bool(request.data.get('table'))}
        try:
            return Response(simulate_summary(serializer.build(), config))
        except PrivCacheError as exc:
            return error_response(exc)


class AuditRunViewSet(viewsets.ModelViewSet):
    queryset = AuditRun.objects.all().order_by('-id')
    serializer_class = AuditRunSerializer
    permission_classes = [IsAuthenticatedOrReadOnly]

    def create(self, request, *args, **kwargs):
        serializer = self.get_serializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data
        config = {**data.get('params', {}), 'scheme': data['scheme'], 'mode': data.get('mode') or None,
                  'seed': data['seed'], 'trials': data.get('trials')}
        try:
            mode = preflight(data['kind'], config)
        except PrivCacheError as exc:
            return error_response(exc)
        run = serializer.save(requested_by=request.user, mode=mode)
        run_audit.delay(run.id)
        logger.info("[Audit] queued run %s %s %s", run.id, run.scheme, run.kind)
        return Response(self.get_serializer(run).data, status=status.HTTP_201_CREATED)

    @action(detail=True, methods=['get'])
    def report(self, request, pk=None):
        run = self.get_object()
        if run.report is None:
            return Response({'status': run.status, 'error': run.error}, status=status.HTTP_404_NOT_FOUND)
        return Response(run.report)

    @action(detail=False, methods=['get'])
    def by_scheme(self, request):
        scheme = request.query_params.get('scheme')
        queryset = AuditRun.objects.filter(scheme=scheme).order_by('-id')
        serializer = AuditRunSerializer(queryset, many=True)
        return Response(serializer.data)
